#include "bmol/runner.hpp"

#include "bmol/bmo.hpp"
#include "bmol/carleson.hpp"
#include "bmol/decompose.hpp"
#include "bmol/dyadic.hpp"
#include "bmol/hardy.hpp"
#include "bmol/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bmol {

namespace {

Operator make_operator(const RunConfig& config, const Space& space) {
  OperatorParams params;
  if (config.operator_kind == OperatorKind::schrodinger) {
    if (!config.operator_potential_file.empty()) {
      FunctionSpec spec;
      spec.name = "file";
      spec.path = config.operator_potential_file;
      params.potential = generate_function(space, spec);
    } else {
      params.potential =
          Eigen::VectorXd::Constant(space.size(), config.operator_potential);
    }
  }
  params.lambda_b = config.operator_lambda_b;
  return build_operator(space, config.operator_kind, params);
}

std::string function_label(const FunctionSpec& spec, std::size_t index) {
  std::ostringstream ss;
  ss << "f" << index << "_" << spec.name;
  if (spec.scale != 1.0) ss << "_x" << spec.scale;
  return ss.str();
}

ordered_json jn_section(const Operator& op, const Eigen::VectorXd& f,
                        const SpaceAnalysis& analysis,
                        const std::string& out_dir, const std::string& label) {
  ordered_json j;
  const JnReport rep = jn_report(op, f, analysis.balls);
  j["bmo_norm"] = rep.norm;
  j["witness_center"] = rep.witness.center;
  j["witness_radius"] = rep.witness.radius;
  j["epsilon"] = rep.epsilon;
  j["lambda0"] = rep.lambda0;
  auto [dist, level] = dist_upper(op, f, analysis.balls);
  j["dist_upper"] = dist;
  j["dist_truncation_level"] = level;
  j["dist_over_epsilon"] = rep.epsilon > 0.0 ? dist / rep.epsilon : 0.0;
  write_text_file(out_dir + "/tail_" + label + ".csv",
                  tail_curve_csv(rep.curve));
  j["tail_rows"] = rep.curve.lambdas.size();
  return j;
}

ordered_json gj_section(const Operator& op, const Eigen::VectorXd& f,
                        const SpaceAnalysis& analysis) {
  ordered_json j;
  ordered_json family = ordered_json::array();
  double ratio0 = -1.0;
  bool homogeneous = true;
  for (double s : {1.0, 2.0, 4.0}) {
    const Eigen::VectorXd fs = s * f;
    auto [eps, l0] = epsilon_L(op, fs, analysis.balls);
    auto [dist, level] = dist_upper(op, fs, analysis.balls);
    const double ratio = eps > 0.0 ? dist / eps : 0.0;
    ordered_json row;
    row["scale"] = s;
    row["epsilon"] = eps;
    row["dist_upper"] = dist;
    row["ratio"] = ratio;
    family.push_back(row);
    if (ratio0 < 0.0)
      ratio0 = ratio;
    else if (ratio != ratio0)
      homogeneous = false;
  }
  j["scale_family"] = family;
  j["ratios_identical_under_scaling"] = homogeneous;
  return j;
}

ordered_json decompose_section(const Operator& op, const Eigen::VectorXd& f,
                               const LatticeEnsemble& ensemble,
                               const SpaceAnalysis& analysis,
                               const RunConfig& config,
                               const std::string& out_dir,
                               const std::string& label,
                               Eigen::VectorXd* h_out) {
  ordered_json j;
  auto [eps_l, lambda0] = epsilon_L(op, f, analysis.balls);
  const double bmo = bmo_norm(op, f, analysis.balls).first;
  if (bmo <= 1e-13 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
    j["degenerate"] = "bmo norm is zero; f is already flat";
    if (h_out) h_out->setZero(f.size());
    return j;
  }
  const double eps = eps_l > 0.0 ? config.eps_factor * eps_l
                                 : config.eps_factor * bmo;
  j["epsilon_source"] = eps_l > 0.0 ? "tail_rate" : "bmo_fallback";
  Decomposition dec = global_decompose(op, f, ensemble, eps, &analysis);
  j["decomposition"] = decomposition_to_json(dec);
  j["reconstruction_residual"] =
      (f - dec.g - dec.h).cwiseAbs().maxCoeff();
  if (h_out) *h_out = dec.h;

  // stopping certificates and grading decay on the first member lattice
  const DyadicSystem& sys = ensemble.systems.front();
  std::ostringstream gamma_csv;
  gamma_csv << "lambda,generation,gamma\n";
  ordered_json sweeps = ordered_json::array();
  for (double mult : config.lambda_multipliers) {
    const double lambda = mult * bmo;
    ordered_json sweep;
    sweep["lambda"] = lambda;
    try {
      StoppingForest forest =
          stopping_time(op, f, sys, sys.levels.front().front(), lambda);
      const CoefficientReport coeffs = coefficient_checks(forest, op);
      sweep["selected"] = forest.selected_count();
      sweep["window_violations"] = forest.window_violations;
      sweep["c_size"] = coeffs.c_size;
      sweep["c_smooth"] = coeffs.c_smooth;
      sweep["c_holder"] = coeffs.c_holder;
      sweep["c_int_m0"] = coeffs.c_int_m0;
      sweep["c_int_m1"] = coeffs.c_int_m1;
      sweep["reconstruction_residual"] = forest.reconstruction_residual();
      const auto ratios = generation_mass_ratios(forest);
      for (std::size_t g = 0; g < ratios.size(); ++g)
        gamma_csv << lambda << "," << (g + 1) << "," << ratios[g] << "\n";
      sweep["max_gamma"] =
          ratios.empty() ? 0.0
                         : *std::max_element(ratios.begin(), ratios.end());
    } catch (const std::exception& e) {
      sweep["error"] = e.what();
    }
    sweeps.push_back(sweep);
  }
  j["lambda_sweep"] = sweeps;
  write_text_file(out_dir + "/gamma_" + label + ".csv", gamma_csv.str());
  return j;
}

ordered_json carleson_section(const Operator& op, const Eigen::VectorXd& f,
                              const LatticeEnsemble& ensemble,
                              const SpaceAnalysis& analysis,
                              const RunConfig& config,
                              const std::string& out_dir,
                              const std::string& label) {
  ordered_json j;
  const double bmo = bmo_norm(op, f, analysis.balls).first;
  if (bmo <= 1e-13 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
    j["degenerate"] = "bmo norm is zero; sigma empty";
    return j;
  }
  BalayageOptions options;
  options.c0 = config.c0;
  options.analysis = &analysis;

  double theta = config.theta;
  ordered_json attempts = ordered_json::array();
  for (int attempt = 0; attempt < 5; ++attempt) {
    try {
      IterationResult result = iterate_balayage(
          op, f, ensemble, theta, config.max_iter, config.rho_target, options);
      j["theta_used"] = theta;
      j["iterations"] = result.history.size();
      j["identity_residual"] = result.identity_residual;
      j["final_certificate"] = result.final_certificate;
      j["certificate_over_bmo"] = result.final_certificate / bmo;
      j["final_remainder_bmo"] =
          result.history.empty() ? 0.0 : result.history.back().remainder_bmo;
      const double sigma_norm = carleson_norm(result.sigma_total, analysis.balls);
      j["sigma_norm"] = sigma_norm;
      j["graded_measure_constant"] =
          sigma_norm * std::pow(theta, analysis.fit.n_D) / bmo;
      write_text_file(out_dir + "/history_" + label + ".csv",
                      history_csv(result.history));
      write_text_file(out_dir + "/sigma_" + label + ".csv",
                      sigma_csv(result.sigma_total));
      j["theta_attempts"] = attempts;
      return j;
    } catch (const std::exception& e) {
      ordered_json fail;
      fail["theta"] = theta;
      fail["error"] = e.what();
      attempts.push_back(fail);
      theta /= 2.0;
    }
  }
  j["error"] = "contraction failed for every attempted theta";
  j["theta_attempts"] = attempts;
  return j;
}

ordered_json hardy_section(const Operator& op, const Eigen::VectorXd& f,
                           const SpaceAnalysis& analysis,
                           const Eigen::VectorXd* h, double eps) {
  ordered_json j;
  // atoms across the radius range, both orders
  std::vector<Atom> atoms;
  int invalid = 0;
  std::vector<double> radii;
  for (const Ball& b : analysis.balls)
    if (radii.empty() || b.radius > radii.back() * 1.9) radii.push_back(b.radius);
  for (const Ball& b : analysis.balls) {
    if (atoms.size() >= 64) break;
    const bool keep =
        std::find(radii.begin(), radii.end(), b.radius) != radii.end() &&
        b.center % 3 == 0;
    if (!keep) continue;
    for (int M : {1, 2}) {
      try {
        Atom atom = make_atom(op, b, M);
        if (!check_atom(op, atom).ok) ++invalid;
        atoms.push_back(std::move(atom));
      } catch (const std::invalid_argument&) {
        // ball too small for this order
      }
    }
  }
  j["atom_count"] = atoms.size();
  j["invalid_atoms"] = invalid;

  const PairingReport base = pairing_test(op, f, atoms, analysis.balls);
  j["pairing_max_over_bmo"] = base.max_ratio;
  j["pairing_degenerate_flag"] = base.degenerate_flag;
  if (h && eps > 0.0) {
    const PairingReport hp = pairing_test(op, *h, atoms, analysis.balls);
    double worst = 0.0;
    for (const auto& row : hp.rows)
      worst = std::max(worst, std::abs(row.pairing));
    j["h_pairing_max"] = worst;
    j["h_pairing_over_eps"] = worst / eps;
  }

  const Eigen::VectorXd s = square_function(op, f, dyadic_time_grid(op.space()));
  j["square_function_l1"] = (s.array() * op.space().measure.array()).sum();
  return j;
}

}  // namespace

BenchTable bench_distance_bracket(const RunConfig& config) {
  if (config.functions.size() < 3)
    throw std::invalid_argument(
        "bench: needs at least 3 function specs (function.list)");
  const Space space =
      build_grid_space(config.space_dim, config.space_side, config.space_boundary);
  const Operator op = make_operator(config, space);
  const SpaceAnalysis analysis = analyze_space(space, config.radii_per_octave);

  BenchTable table;
  table.kappa_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < config.functions.size(); ++i) {
    const Eigen::VectorXd f = generate_function(space, config.functions[i]);
    BenchRow row;
    row.function = function_label(config.functions[i], i);
    row.op = to_string(config.operator_kind);
    row.bmo = bmo_norm(op, f, analysis.balls).first;
    row.epsilon = epsilon_L(op, f, analysis.balls).first;
    row.dist = dist_upper(op, f, analysis.balls).first;
    if (row.epsilon > 0.0) {
      row.ratio = row.dist / row.epsilon;
      table.kappa_min = std::min(table.kappa_min, row.ratio);
      table.kappa_max = std::max(table.kappa_max, row.ratio);
      ++table.included;
    } else {
      row.flagged = true;
    }
    table.rows.push_back(row);
  }
  if (table.included == 0) table.kappa_min = 0.0;
  return table;
}

std::string bench_csv(const BenchTable& table) {
  std::ostringstream out;
  out << "function,operator,bmo_norm,epsilon,dist_upper,ratio,flagged\n";
  for (const BenchRow& r : table.rows)
    out << r.function << "," << r.op << "," << r.bmo << "," << r.epsilon << ","
        << r.dist << "," << r.ratio << "," << (r.flagged ? 1 : 0) << "\n";
  out << "summary,,,,," << table.kappa_max << ",\n";
  return out.str();
}

int run_scenarios(const RunConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Space space =
      build_grid_space(config.space_dim, config.space_side, config.space_boundary);
  const Operator op = make_operator(config, space);
  const SpaceAnalysis analysis = analyze_space(space, config.radii_per_octave);
  const LatticeEnsemble ensemble =
      sample_ensemble(space, config.lattices, config.seed);

  ordered_json report;
  report["seed"] = config.seed;
  report["space"] = {{"points", space.size()},
                     {"dim", space.dim},
                     {"side", space.side},
                     {"boundary", to_string(space.boundary)},
                     {"spacing", space.spacing},
                     {"diameter", space.diameter()},
                     {"balls", analysis.balls.size()},
                     {"doubling_C", analysis.fit.C_D},
                     {"doubling_exponent", analysis.fit.n_D}};
  {
    const AxiomReport axioms = verify_axioms(ensemble.systems.front());
    report["lattice"] = {{"axioms_pass", axioms.all_pass()},
                         {"best_c1", axioms.best_c1},
                         {"best_C1", axioms.best_C1},
                         {"count", ensemble.count}};
  }
  report["operator"] = {{"kind", to_string(config.operator_kind)},
                        {"conservative", op.conservative()}};

  ordered_json functions = ordered_json::array();
  for (std::size_t i = 0; i < config.functions.size(); ++i) {
    const std::string label = function_label(config.functions[i], i);
    ordered_json entry;
    entry["label"] = label;
    const Eigen::VectorXd f = generate_function(space, config.functions[i]);
    Eigen::VectorXd h;
    double eps_used = 0.0;
    static const std::vector<std::string> order = {"jn", "gj", "decompose",
                                                   "carleson", "hardy"};
    for (const std::string& pipeline : order) {
      if (!config.pipelines.count(pipeline)) continue;
      try {
        if (pipeline == "jn") {
          entry["jn"] = jn_section(op, f, analysis, out_dir, label);
        } else if (pipeline == "gj") {
          entry["gj"] = gj_section(op, f, analysis);
        } else if (pipeline == "decompose") {
          entry["decompose"] = decompose_section(op, f, ensemble, analysis,
                                                 config, out_dir, label, &h);
          if (entry["decompose"].contains("decomposition"))
            eps_used = entry["decompose"]["decomposition"]["epsilon"];
        } else if (pipeline == "carleson") {
          entry["carleson"] =
              carleson_section(op, f, ensemble, analysis, config, out_dir, label);
        } else if (pipeline == "hardy") {
          entry["hardy"] = hardy_section(op, f, analysis,
                                         h.size() ? &h : nullptr, eps_used);
        }
      } catch (const std::exception& e) {
        entry[pipeline] = ordered_json{{"error", e.what()}};
      }
    }
    functions.push_back(entry);
  }
  report["functions"] = functions;

  std::ofstream out(out_dir + "/report.json");
  out << report.dump(2) << "\n";
  return 0;
}

}  // namespace bmol
