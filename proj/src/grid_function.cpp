#include "nlbvp/grid_function.hpp"

#include <cmath>
#include <sstream>

namespace nlbvp {

GridFunction GridFunction::sample(const Mesh& m, const std::function<double(const Vec2&)>& f) {
  GridFunction g(m);
  for (int i = 0; i < m.n_nodes(); ++i) g.values[i] = f(m.nodes[i]);
  return g;
}

void GridFunction::check() const {
  if (!mesh) fail_validation("grid function without a mesh");
  if (values.size() != mesh->n_nodes())
    fail_validation("grid function size mismatch",
                    json{{"values", values.size()}, {"nodes", mesh->n_nodes()}});
  for (int i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      fail_validation("grid function carries a non-finite value", json{{"node", i}});
}

double GridFunction::l2_norm() const {
  double s = 0.0;
  for (int i = 0; i < values.size(); ++i) s += mesh->weights[i] * values[i] * values[i];
  return std::sqrt(s);
}

double GridFunction::weighted_sum() const {
  double s = 0.0;
  for (int i = 0; i < values.size(); ++i) s += mesh->weights[i] * values[i];
  return s;
}

double GridFunction::dot(const GridFunction& other) const {
  double s = 0.0;
  for (int i = 0; i < values.size(); ++i) s += mesh->weights[i] * values[i] * other.values[i];
  return s;
}

std::string GridFunction::to_csv() const {
  std::string out = "node_index,value\n";
  for (int i = 0; i < values.size(); ++i)
    out += std::to_string(i) + "," + fmt17(values[i]) + "\n";
  return out;
}

json GridFunction::to_json() const {
  json v = json::array();
  for (int i = 0; i < values.size(); ++i) v.push_back(values[i]);
  return json{{"values", v}};
}

GridFunction GridFunction::from_csv(const Mesh& m, const std::string& csv) {
  GridFunction g(m);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail_validation("bad grid-function CSV line", json{{"line", line}});
    const int idx = std::stoi(line.substr(0, comma));
    if (idx < 0 || idx >= m.n_nodes())
      fail_validation("grid-function CSV index out of range", json{{"index", idx}});
    g.values[idx] = std::stod(line.substr(comma + 1));
  }
  return g;
}

VectorGridFunction VectorGridFunction::sample(const Mesh& m,
                                              const std::function<Vec2(const Vec2&)>& f) {
  VectorGridFunction g(m);
  for (int i = 0; i < m.n_nodes(); ++i) g.values[static_cast<std::size_t>(i)] = f(m.nodes[i]);
  return g;
}

}  // namespace nlbvp
