#include "jrmq/grid_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace jrmq {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "jrmq-grid v1";

json settings_to_json(const QuantizationGrid& grid) {
  const auto& s = grid.settings;
  return json{
      {"K", s.num_steps},
      {"n_x", s.n_x},
      {"n_y", s.n_y},
      {"joint_method", to_string(s.method)},
      {"x_boundary", to_string(s.x_mode)},
      {"y_boundary", to_string(s.y_mode)},
      {"newton",
       {{"max_iterations", s.newton.max_iterations},
        {"gradient_tolerance", s.newton.gradient_tolerance},
        {"damping", s.newton.damping}}},
  };
}

GridSettings settings_from_json(const json& j) {
  GridSettings s;
  s.num_steps = j.at("K").get<int>();
  s.n_x = j.at("n_x").get<int>();
  s.n_y = j.at("n_y").get<int>();
  s.method = joint_method_from_string(j.at("joint_method").get<std::string>());
  s.x_mode = boundary_from_string(j.at("x_boundary").get<std::string>());
  s.y_mode = boundary_from_string(j.at("y_boundary").get<std::string>());
  const auto& n = j.at("newton");
  s.newton.max_iterations = n.at("max_iterations").get<int>();
  s.newton.gradient_tolerance = n.at("gradient_tolerance").get<double>();
  s.newton.damping = n.at("damping").get<double>();
  return s;
}

void write_matrix_block(std::ostream& os, const char* name, int k,
                        const Matrix& m) {
  os << name << " k=" << k << " rows=" << m.rows() << " cols=" << m.cols()
     << "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_float(m(r, c));
    }
    os << "\n";
  }
}

Matrix read_matrix_block(std::istream& is, const std::string& header,
                         const char* name, int expected_k) {
  std::istringstream hs(header);
  std::string tag, kpart, rpart, cpart;
  hs >> tag >> kpart >> rpart >> cpart;
  if (tag != name) {
    throw IoError("grid file: expected block '" + std::string(name) +
                  "', found '" + tag + "'");
  }
  const int k = std::atoi(kpart.c_str() + 2);
  if (k != expected_k) {
    throw IoError("grid file: transition block out of order");
  }
  const std::size_t rows = std::strtoull(rpart.c_str() + 5, nullptr, 10);
  const std::size_t cols = std::strtoull(cpart.c_str() + 5, nullptr, 10);
  Matrix m(rows, cols);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(is, line)) {
      throw IoError("grid file: truncated transition block");
    }
    const char* p = line.c_str();
    char* end = nullptr;
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = std::strtod(p, &end);
      if (end == p) throw IoError("grid file: malformed transition row");
      p = *end == ',' ? end + 1 : end;
    }
  }
  return m;
}

} // namespace

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_grid(std::ostream& os, const QuantizationGrid& grid) {
  if (grid.preset.values.empty()) {
    throw ConfigError(
        "write_grid: only preset-backed grids can be serialized");
  }
  json meta;
  meta["model"] = {{"name", to_string(grid.preset.name)},
                   {"params", grid.preset.values}};
  meta["grid"] = settings_to_json(grid);
  meta["dt"] = grid.dt;
  json absorbed_x = json::array(), absorbed_y = json::array();
  json x_probs = json::array();
  for (const auto& st : grid.stages) {
    absorbed_x.push_back(st.x.absorbed_mass);
    absorbed_y.push_back(st.y.absorbed_mass);
    x_probs.push_back(st.x.probabilities);
  }
  meta["absorbed_x"] = absorbed_x;
  meta["absorbed_y"] = absorbed_y;
  // the joint drops absorbed y mass, so the x marginal is stored explicitly
  meta["x_probabilities"] = x_probs;

  os << kFormatTag << "\n";
  os << meta.dump() << "\n";
  os << "joint\n";
  os << "k,i,u,x_codeword,y_codeword,joint_probability\n";
  for (std::size_t k = 0; k < grid.stages.size(); ++k) {
    const auto& st = grid.stages[k];
    for (std::size_t i = 0; i < st.x.size(); ++i) {
      for (std::size_t u = 0; u < st.y.size(); ++u) {
        os << k << ',' << i << ',' << u << ','
           << format_float(st.x.codewords[i]) << ','
           << format_float(st.y.codewords[u]) << ','
           << format_float(st.joint(i, u)) << "\n";
      }
    }
  }
  for (std::size_t k = 1; k < grid.stages.size(); ++k) {
    write_matrix_block(os, "x_transition", static_cast<int>(k),
                       grid.stages[k].x_transition);
    write_matrix_block(os, "y_transition", static_cast<int>(k),
                       grid.stages[k].y_transition);
  }
  os << "end\n";
}

void write_grid_file(const std::string& path, const QuantizationGrid& grid) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_grid(os, grid);
  if (!os) throw IoError("write failed: " + path);
}

QuantizationGrid read_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kFormatTag) {
    throw IoError("grid file: missing or unknown format tag");
  }
  if (!std::getline(is, line)) throw IoError("grid file: missing metadata");
  json meta;
  try {
    meta = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("grid file: bad metadata: ") + e.what());
  }

  QuantizationGrid grid;
  grid.preset.name =
      preset_from_string(meta.at("model").at("name").get<std::string>());
  for (const auto& [key, value] :
       meta.at("model").at("params").items()) {
    grid.preset.values[key] = value.get<double>();
  }
  grid.model = make_preset(grid.preset);
  grid.settings = settings_from_json(meta.at("grid"));
  grid.dt = meta.at("dt").get<double>();
  const auto absorbed_x = meta.at("absorbed_x").get<std::vector<double>>();
  const auto absorbed_y = meta.at("absorbed_y").get<std::vector<double>>();
  const auto x_probs =
      meta.at("x_probabilities").get<std::vector<std::vector<double>>>();

  if (!std::getline(is, line) || line != "joint") {
    throw IoError("grid file: missing joint section");
  }
  std::getline(is, line);  // column header

  const int K = grid.settings.num_steps;
  grid.stages.resize(K + 1);
  // first pass: collect rows per stage; sizes are implied by the indices
  std::vector<std::vector<std::array<double, 3>>> rows(K + 1);
  std::vector<std::size_t> max_i(K + 1, 0), max_u(K + 1, 0);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("x_transition", 0) == 0 || line == "end") break;
    long k, i, u;
    double xc, yc, p;
    if (std::sscanf(line.c_str(), "%ld,%ld,%ld,%lf,%lf,%lf", &k, &i, &u, &xc,
                    &yc, &p) != 6) {
      throw IoError("grid file: malformed joint row: " + line);
    }
    if (k < 0 || k > K) throw IoError("grid file: stage index out of range");
    rows[k].push_back({xc, yc, p});
    max_i[k] = std::max(max_i[k], static_cast<std::size_t>(i));
    max_u[k] = std::max(max_u[k], static_cast<std::size_t>(u));
  }
  for (int k = 0; k <= K; ++k) {
    const std::size_t ni = max_i[k] + 1, nu = max_u[k] + 1;
    if (rows[k].size() != ni * nu) {
      throw IoError("grid file: incomplete joint table at stage " +
                    std::to_string(k));
    }
    auto& st = grid.stages[k];
    st.x.time_index = k;
    st.y.time_index = k;
    st.x.codewords.resize(ni);
    st.y.codewords.resize(nu);
    st.joint = Matrix(ni, nu);
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t u = 0; u < nu; ++u) {
        const auto& row = rows[k][i * nu + u];
        st.x.codewords[i] = row[0];
        st.y.codewords[u] = row[1];
        st.joint(i, u) = row[2];
      }
    }
    st.x.absorbed_mass = absorbed_x.at(k);
    st.y.absorbed_mass = absorbed_y.at(k);
    st.x.probabilities = x_probs.at(k);
    if (st.x.probabilities.size() != ni) {
      throw IoError("grid file: x probability vector size mismatch");
    }
    st.y.probabilities.resize(nu);
    for (std::size_t u = 0; u < nu; ++u) {
      st.y.probabilities[u] = st.joint.col_sum(u);
    }
  }

  for (int k = 1; k <= K; ++k) {
    grid.stages[k].x_transition =
        read_matrix_block(is, line, "x_transition", k);
    if (!std::getline(is, line)) throw IoError("grid file: truncated");
    grid.stages[k].y_transition =
        read_matrix_block(is, line, "y_transition", k);
    if (!std::getline(is, line)) throw IoError("grid file: truncated");
  }
  if (line != "end") throw IoError("grid file: missing end marker");
  return grid;
}

QuantizationGrid read_grid_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  return read_grid(is);
}

} // namespace jrmq
