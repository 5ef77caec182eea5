#include "bmol/serialize.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bmol {

namespace {

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

ordered_json space_to_json(const Space& space) {
  ordered_json j;
  j["points"] = space.size();
  j["dim"] = space.dim;
  j["side"] = space.side;
  j["boundary"] = to_string(space.boundary);
  j["spacing"] = space.spacing;
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(space.size()) * space.size());
  for (int i = 0; i < space.size(); ++i)
    for (int k = 0; k < space.size(); ++k) dist.push_back(space.dist(i, k));
  j["dist"] = dist;
  std::vector<double> mu(space.measure.data(),
                         space.measure.data() + space.size());
  j["measure"] = mu;
  std::vector<double> coords;
  for (int i = 0; i < space.size(); ++i)
    for (int k = 0; k < space.dim; ++k) coords.push_back(space.coords(i, k));
  j["coords"] = coords;
  return j;
}

Space space_from_json(const ordered_json& j) {
  Space s;
  const int n = j.at("points").get<int>();
  s.dim = j.at("dim").get<int>();
  s.side = j.value("side", 0);
  s.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  s.spacing = j.at("spacing").get<double>();
  const auto dist = j.at("dist").get<std::vector<double>>();
  if (static_cast<int>(dist.size()) != n * n)
    throw std::invalid_argument("space_from_json: dist length mismatch");
  s.dist.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) s.dist(i, k) = dist[i * n + k];
  const auto mu = j.at("measure").get<std::vector<double>>();
  if (static_cast<int>(mu.size()) != n)
    throw std::invalid_argument("space_from_json: measure length mismatch");
  s.measure = Eigen::Map<const Eigen::VectorXd>(mu.data(), n);
  if (j.contains("coords")) {
    const auto coords = j.at("coords").get<std::vector<double>>();
    s.coords.resize(n, s.dim);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < s.dim; ++k) s.coords(i, k) = coords[i * s.dim + k];
  }
  validate_space(s);
  return s;
}

ordered_json system_to_json(const DyadicSystem& system) {
  ordered_json j;
  j["k_min"] = system.k_min;
  j["k_max"] = system.k_max;
  j["c1"] = system.c1;
  j["C1"] = system.C1;
  std::vector<double> shift(system.shift.data(),
                            system.shift.data() + system.shift.size());
  j["shift"] = shift;
  ordered_json levels = ordered_json::array();
  for (int k = system.k_min; k <= system.k_max; ++k) {
    ordered_json level;
    level["level"] = k;
    ordered_json cubes = ordered_json::array();
    for (int ci : system.levels[k - system.k_min]) {
      const DyadicCube& q = system.cube(ci);
      ordered_json cube;
      cube["index"] = q.index;
      cube["side"] = q.side;
      cube["parent"] = q.parent;
      cube["members"] = q.members;
      cubes.push_back(cube);
    }
    level["cubes"] = cubes;
    levels.push_back(level);
  }
  j["levels"] = levels;
  return j;
}

ordered_json forest_to_json(const StoppingForest& forest) {
  ordered_json j;
  j["root"] = forest.root;
  j["lambda"] = forest.lambda;
  j["window_D"] = forest.window_D;
  j["window_violations"] = forest.window_violations;
  j["entry_violations"] = forest.entry_violations;
  j["pointwise_exceptions"] = forest.pointwise_exceptions;
  ordered_json gens = ordered_json::array();
  for (const auto& gen : forest.generations) {
    ordered_json g = ordered_json::array();
    for (const SelectedCube& sel : gen) {
      ordered_json s;
      s["cube"] = sel.cube;
      s["star"] = sel.star;
      s["window_avg"] = sel.window_avg;
      g.push_back(s);
    }
    gens.push_back(g);
  }
  j["generations"] = gens;
  return j;
}

ordered_json decomposition_to_json(const Decomposition& dec) {
  ordered_json j;
  j["lambda"] = dec.lambda;
  j["lambda0"] = dec.lambda0;
  j["epsilon"] = dec.epsilon;
  j["g_inf"] = dec.g_inf;
  j["h_bmo"] = dec.h_bmo;
  j["A1_measured"] = dec.A1_measured;
  j["A2_measured"] = dec.A2_measured;
  j["window_violations"] = dec.window_violations;
  j["entry_violations"] = dec.entry_violations;
  std::vector<double> g(dec.g.data(), dec.g.data() + dec.g.size());
  std::vector<double> h(dec.h.data(), dec.h.data() + dec.h.size());
  j["g"] = g;
  j["h"] = h;
  return j;
}

std::string tail_curve_csv(const TailCurve& curve) {
  std::ostringstream out;
  out << "lambda,tail\n";
  for (std::size_t i = 0; i < curve.lambdas.size(); ++i)
    out << format_double(curve.lambdas[i]) << ","
        << format_double(curve.tails[i]) << "\n";
  return out.str();
}

std::string sigma_csv(const CarlesonMeasure& sigma) {
  std::ostringstream out;
  out << "point,scale,weight\n";
  for (const CarlesonAtom& a : sigma.atoms)
    out << a.point << "," << format_double(a.scale) << ","
        << format_double(a.weight) << "\n";
  return out.str();
}

std::string history_csv(const std::vector<IterationRow>& rows) {
  std::ostringstream out;
  out << "iteration,g_inf,sigma_norm,contraction,remainder_bmo,"
         "bucket_fine,bucket_mid,bucket_coarse\n";
  for (const IterationRow& r : rows)
    out << r.iteration << "," << format_double(r.g_inf) << ","
        << format_double(r.sigma_norm) << "," << format_double(r.contraction)
        << "," << format_double(r.remainder_bmo) << ","
        << format_double(r.bucket_fine) << "," << format_double(r.bucket_mid)
        << "," << format_double(r.bucket_coarse) << "\n";
  return out.str();
}

std::string kernel_csv(const Eigen::MatrixXd& kernel) {
  std::ostringstream out;
  for (int i = 0; i < kernel.rows(); ++i) {
    for (int j = 0; j < kernel.cols(); ++j) {
      if (j) out << ",";
      out << format_double(kernel(i, j));
    }
    out << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace bmol
