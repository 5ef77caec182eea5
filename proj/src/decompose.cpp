#include "bmol/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bmol {

SpaceAnalysis analyze_space(const Space& space, int radii_per_octave) {
  SpaceAnalysis a;
  a.balls = enumerate_balls(space, radii_per_octave);
  a.fit = doubling_fit(space, a.balls);
  return a;
}

namespace {

double cube_time(const DyadicCube& q) { return q.side * q.side; }

double dilated_average(const DyadicSystem& system,
                       const Eigen::VectorXd& values, int cube) {
  const Space& space = *system.space;
  const auto& members = system.dilated_members(cube);
  double s = 0.0;
  for (int p : members) s += values(p) * space.measure(p);
  return s / system.dilated_mass(cube);
}

}  // namespace

double dilated_oscillation_average(const Operator& op, const Eigen::VectorXd& f,
                                   const DyadicSystem& system, int cube) {
  const DyadicCube& q = system.cube(cube);
  const Eigen::VectorXd osc = (f - op.heat_apply(cube_time(q), f)).cwiseAbs();
  return dilated_average(system, osc, cube);
}

const Eigen::VectorXd& StoppingForest::heat_at_level(int level) const {
  return heat_by_level[level - system->k_min];
}

Eigen::VectorXd StoppingForest::coefficient(const SelectedCube& sel) const {
  return heat_at_level(system->cube(sel.cube).level) -
         heat_at_level(system->cube(sel.star).level);
}

Eigen::VectorXd StoppingForest::h_part() const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(f.size());
  for (const auto& gen : generations)
    for (const SelectedCube& sel : gen) {
      const Eigen::VectorXd a = coefficient(sel);
      for (int p : system->cube(sel.cube).members) h(p) += a(p);
    }
  return h;
}

Eigen::VectorXd StoppingForest::target() const {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(f.size());
  const DyadicCube& q = system->cube(root);
  const Eigen::VectorXd& heated = heat_at_level(q.level);
  for (int p : q.members) t(p) = f(p) - heated(p);
  return t;
}

double StoppingForest::reconstruction_residual() const {
  return (g_part + h_part() - target()).cwiseAbs().maxCoeff();
}

int StoppingForest::selected_count() const {
  int n = 0;
  for (const auto& gen : generations) n += static_cast<int>(gen.size());
  return n;
}

StoppingForest stopping_time(const Operator& op, const Eigen::VectorXd& f,
                             const DyadicSystem& system, int root_cube,
                             double lambda) {
  if (f.size() != system.space->size())
    throw std::invalid_argument("stopping_time: f has wrong length");
  StoppingForest forest;
  forest.system = &system;
  forest.op = &op;
  forest.root = root_cube;
  forest.lambda = lambda;
  forest.f = f;
  forest.heat_by_level.reserve(system.num_levels());
  for (int k = system.k_min; k <= system.k_max; ++k) {
    const double side = std::pow(0.5, k);
    forest.heat_by_level.push_back(op.heat_apply(side * side, f));
  }

  // Oscillation against the level-k semigroup scale, shared by all cubes of
  // that level.
  std::vector<Eigen::VectorXd> osc_by_level;
  osc_by_level.reserve(system.num_levels());
  for (const Eigen::VectorXd& heated : forest.heat_by_level)
    osc_by_level.push_back((f - heated).cwiseAbs());

  const DyadicCube& root = system.cube(root_cube);
  const double entry =
      dilated_average(system, osc_by_level[root.level - system.k_min], root_cube);
  if (entry > lambda)
    throw std::invalid_argument(
        "stopping_time: entry condition fails, avg_{2Q0}|f - e^{-l(Q0)^2 L}f| = " +
        std::to_string(entry) + " > lambda = " + std::to_string(lambda));

  forest.window_D = system.dilation_ratio_bound();

  // owner(p) = deepest selected cube containing p, and the level whose
  // semigroup scale currently applies to p.
  const int n = system.space->size();
  std::vector<int> owner_level(n, -1);
  for (int p : root.members) owner_level[p] = root.level;

  struct Task {
    int cube;
    int generation;  // generation of the cubes selected inside
  };
  std::vector<Task> queue{{root_cube, 1}};

  while (!queue.empty()) {
    const Task task = queue.back();
    queue.pop_back();
    const DyadicCube& parent = system.cube(task.cube);
    const Eigen::VectorXd& osc = osc_by_level[parent.level - system.k_min];
    if (task.cube != root_cube &&
        dilated_average(system, osc, task.cube) > lambda)
      ++forest.entry_violations;

    // Maximal proper subcubes exceeding the threshold, scanned top-down.
    std::vector<int> stack(parent.children.begin(), parent.children.end());
    std::vector<SelectedCube> picked;
    while (!stack.empty()) {
      const int ci = stack.back();
      stack.pop_back();
      const double avg = dilated_average(system, osc, ci);
      if (avg > lambda) {
        SelectedCube sel;
        sel.cube = ci;
        sel.star = task.cube;
        sel.window_avg = avg;
        if (!(avg <= forest.window_D * lambda * (1.0 + 1e-12)))
          ++forest.window_violations;
        picked.push_back(sel);
      } else {
        const DyadicCube& q = system.cube(ci);
        stack.insert(stack.end(), q.children.begin(), q.children.end());
      }
    }
    if (picked.empty()) continue;
    if (static_cast<int>(forest.generations.size()) < task.generation)
      forest.generations.resize(task.generation);
    auto& gen = forest.generations[task.generation - 1];
    for (const SelectedCube& sel : picked) {
      gen.push_back(sel);
      const DyadicCube& q = system.cube(sel.cube);
      for (int p : q.members) owner_level[p] = q.level;
      if (!q.children.empty()) queue.push_back({sel.cube, task.generation + 1});
    }
  }

  forest.g_part = Eigen::VectorXd::Zero(n);
  for (int p : root.members) {
    const int level = owner_level[p];
    forest.g_part(p) = f(p) - forest.heat_at_level(level)(p);
    if (osc_by_level[level - system.k_min](p) > lambda)
      ++forest.pointwise_exceptions;
  }
  return forest;
}

CoefficientReport coefficient_checks(const StoppingForest& forest,
                                     const Operator& op) {
  CoefficientReport rep;
  const DyadicSystem& system = *forest.system;
  const double lambda = forest.lambda;
  for (std::size_t g = 0; g < forest.generations.size(); ++g) {
    CoefficientReport::Row row;
    row.generation = static_cast<int>(g) + 1;
    for (const SelectedCube& sel : forest.generations[g]) {
      const DyadicCube& q = system.cube(sel.cube);
      const Eigen::VectorXd a = forest.coefficient(sel);
      const Eigen::VectorXd la = op.apply(a);
      const auto& dilated = system.dilated_members(sel.cube);
      const double l2 = q.side * q.side;
      for (int p : dilated) {
        row.c_size = std::max(row.c_size, std::abs(a(p)) / lambda);
        row.c_smooth = std::max(row.c_smooth, std::abs(la(p)) * l2 / lambda);
      }
      for (double frac : {0.25, 0.5, 1.0}) {
        const double t = frac * q.side;
        const Eigen::VectorXd v = a - op.heat_apply(t * t, a);
        const double scale = (q.side / t) * (q.side / t) / lambda;
        for (int p : dilated)
          row.c_holder = std::max(row.c_holder, std::abs(v(p)) * scale);
      }
      const double t2 = l2;
      const Eigen::MatrixXd& K = op.heat_kernel(t2);
      const Eigen::VectorXd abs_a = a.cwiseAbs();
      const Eigen::VectorXd abs_la = (l2 * la).cwiseAbs();
      const Eigen::VectorXd& mu = system.space->measure;
      for (int p : dilated) {
        double i0 = 0.0, i1 = 0.0;
        for (int y = 0; y < a.size(); ++y) {
          const double kv = std::abs(K(p, y)) * mu(y);
          i0 += kv * abs_a(y);
          i1 += kv * abs_la(y);
        }
        row.c_int_m0 = std::max(row.c_int_m0, i0 / lambda);
        row.c_int_m1 = std::max(row.c_int_m1, i1 / lambda);
      }
    }
    rep.rows.push_back(row);
    rep.c_size = std::max(rep.c_size, row.c_size);
    rep.c_smooth = std::max(rep.c_smooth, row.c_smooth);
    rep.c_holder = std::max(rep.c_holder, row.c_holder);
    rep.c_int_m0 = std::max(rep.c_int_m0, row.c_int_m0);
    rep.c_int_m1 = std::max(rep.c_int_m1, row.c_int_m1);
  }
  return rep;
}

std::vector<double> generation_mass_ratios(const StoppingForest& forest) {
  const DyadicSystem& system = *forest.system;
  std::vector<double> ratios;
  for (std::size_t g = 0; g < forest.generations.size(); ++g) {
    std::map<int, double> per_parent;
    for (const SelectedCube& sel : forest.generations[g])
      per_parent[sel.star] += system.cube(sel.cube).mass;
    double worst = 0.0;
    for (const auto& [star, mass] : per_parent)
      worst = std::max(worst, mass / system.cube(star).mass);
    ratios.push_back(worst);
  }
  return ratios;
}

namespace {

struct SlotBuild {
  std::vector<std::vector<std::vector<int>>> families;  // [k][i-1]
  int lower_bound_misses = 0;
  int grading_violations = 0;
  bool top_step_ok = true;
};

// Builds the interpolating families for one m; the walk from each cube stops
// at the first ancestor holding at most half its mass in the current union.
SlotBuild build_slots(const StoppingForest& forest, int m, double n_D) {
  const DyadicSystem& system = *forest.system;
  const Space& space = *system.space;
  const int n = space.size();
  const double mass_floor = std::pow(2.0, -n_D - 1.0);
  SlotBuild out;
  const int K = static_cast<int>(forest.generations.size());
  out.families.resize(K);

  for (int k = 1; k <= K; ++k) {
    auto& slots = out.families[k - 1];
    slots.assign(m, {});
    std::vector<int> current;
    std::vector<int> host_of;  // bounding previous-generation cube per current
    for (const SelectedCube& sel : forest.generations[k - 1]) {
      current.push_back(sel.cube);
      host_of.push_back(sel.star);
    }
    slots[m - 1] = current;

    for (int i = m - 1; i >= 1; --i) {
      // mass of the current union per point
      std::vector<double> in_mass(n, 0.0);
      for (int ci : current)
        for (int p : system.cube(ci).members) in_mass[p] = space.measure(p);

      std::vector<int> chosen;
      std::vector<int> chosen_host;
      for (std::size_t idx = 0; idx < current.size(); ++idx) {
        const int host = host_of[idx];
        int a = system.cube(current[idx]).parent;
        int pick = -1;
        while (a >= 0) {
          const DyadicCube& anc = system.cube(a);
          double inter = 0.0;
          for (int p : anc.members) inter += in_mass[p];
          const double ratio = inter / anc.mass;
          if (ratio <= 0.5 * (1.0 + 1e-12)) {
            pick = a;
            if (ratio < mass_floor * (1.0 - 1e-12)) ++out.lower_bound_misses;
            break;
          }
          if (a == host) {
            // even the previous-generation host is more than half full;
            // the input grading is broken and no slot count can repair it
            pick = a;
            ++out.grading_violations;
            break;
          }
          a = anc.parent;
        }
        if (pick < 0) {
          pick = host;
          ++out.grading_violations;
        }
        chosen.push_back(pick);
        chosen_host.push_back(host);
      }
      // delete cubes contained in another chosen cube
      std::vector<int> kept;
      std::vector<int> kept_host;
      for (std::size_t aidx = 0; aidx < chosen.size(); ++aidx) {
        bool nested = false;
        for (std::size_t bidx = 0; bidx < chosen.size(); ++bidx) {
          if (aidx == bidx) continue;
          const auto& A = system.cube(chosen[aidx]);
          const auto& B = system.cube(chosen[bidx]);
          if (A.index == B.index) {
            nested = aidx > bidx;  // keep the first duplicate
            if (nested) break;
            continue;
          }
          if (A.level > B.level &&
              std::includes(B.members.begin(), B.members.end(),
                            A.members.begin(), A.members.end())) {
            nested = true;
            break;
          }
        }
        if (!nested) {
          kept.push_back(chosen[aidx]);
          kept_host.push_back(chosen_host[aidx]);
        }
      }
      slots[i - 1] = kept;
      current = kept;
      host_of = kept_host;
    }

    // top step: the coarsest slot family must fill previous-generation cubes
    // at most halfway
    std::vector<double> in_mass(n, 0.0);
    for (int ci : slots[0])
      for (int p : system.cube(ci).members) in_mass[p] = space.measure(p);
    if (k == 1) {
      const DyadicCube& root = system.cube(forest.root);
      double inter = 0.0;
      for (int p : root.members) inter += in_mass[p];
      if (inter > 0.5 * root.mass * (1.0 + 1e-12)) out.top_step_ok = false;
    } else {
      for (const SelectedCube& sel : forest.generations[k - 2]) {
        const DyadicCube& q = system.cube(sel.cube);
        double inter = 0.0;
        for (int p : q.members) inter += in_mass[p];
        if (inter > 0.5 * q.mass * (1.0 + 1e-12)) {
          out.top_step_ok = false;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

RefinedGrading graded_refine(const StoppingForest& forest, double eps_prime,
                             double n_D) {
  if (forest.generations.empty())
    throw std::invalid_argument("graded_refine: forest has no generations");
  if (eps_prime <= 0.0)
    throw std::invalid_argument("graded_refine: eps_prime must be positive");
  const double ratio = forest.lambda / ((n_D + 1.0) * eps_prime);
  int m = static_cast<int>(std::ceil(ratio - 1e-12)) - 1;
  if (m < 1)
    throw std::invalid_argument(
        "graded_refine: lambda/((n_D+1) eps') = " + std::to_string(ratio) +
        " leaves no interpolation room; lower eps' or raise lambda");

  RefinedGrading out;
  out.n_D = n_D;
  SlotBuild build;
  while (true) {
    build = build_slots(forest, m, n_D);
    if (build.top_step_ok || m == 1) break;
    --m;
    ++out.decrements;
  }
  out.m = m;
  out.lower_bound_misses = build.lower_bound_misses;
  out.grading_violations = build.grading_violations;
  if (!build.top_step_ok) ++out.grading_violations;
  out.slot_families = std::move(build.families);

  out.flat.system = forest.system;
  out.flat.gamma = 0.5;
  for (const auto& slots : out.slot_families)
    for (const auto& family : slots) out.flat.generations.push_back(family);
  return out;
}

RefinedGrading graded_refine(const StoppingForest& forest, double eps_prime) {
  const SpaceAnalysis analysis = analyze_space(*forest.system->space);
  return graded_refine(forest, eps_prime, analysis.fit.n_D);
}

AveragedDecomposition averaged_decompose(const Operator& op,
                                         const Eigen::VectorXd& f,
                                         const DyadicSystem& system,
                                         int root_cube, double lambda,
                                         double eps,
                                         const SpaceAnalysis* analysis) {
  AveragedDecomposition dec;
  dec.forest = stopping_time(op, f, system, root_cube, lambda);
  const Eigen::VectorXd target = dec.forest.target();
  const int n = system.space->size();

  if (dec.forest.generations.empty()) {
    dec.g = target;
    dec.h = Eigen::VectorXd::Zero(n);
    dec.g2_inf = target.cwiseAbs().maxCoeff();
    return dec;
  }

  if (eps <= 0.0)
    throw std::invalid_argument("averaged_decompose: eps must be positive");
  const double eps_prime = 1.05 * eps;
  if (analysis)
    dec.grading = graded_refine(dec.forest, eps_prime, analysis->fit.n_D);
  else
    dec.grading = graded_refine(dec.forest, eps_prime);
  const int m = dec.grading.m;
  dec.m = m;

  // slot owner maps: for generation k, slot i, point -> cube of the family
  const int K = static_cast<int>(dec.forest.generations.size());
  std::vector<std::vector<std::vector<int>>> slot_owner(K);
  for (int k = 1; k <= K; ++k) {
    slot_owner[k - 1].assign(m, std::vector<int>(n, -1));
    for (int i = 1; i <= m; ++i)
      for (int ci : dec.grading.slot_families[k - 1][i - 1])
        for (int p : system.cube(ci).members) slot_owner[k - 1][i - 1][p] = ci;
  }

  const int root_level = system.cube(root_cube).level;
  auto slot_level = [&](int k, int i, int point) {
    // level of the slot-(k,i) family cube containing the point; k = 0 is the
    // root at every slot
    if (k == 0) return root_level;
    const int ci = slot_owner[k - 1][i - 1][point];
    return system.cube(ci).level;
  };

  // averaged operator E_{Q_k,L} f at a point of Q_k
  auto averaged_heat = [&](int k, int point) {
    double s = 0.0;
    for (int i = 1; i <= m; ++i)
      s += dec.forest.heat_at_level(slot_level(k, i, point))(point);
    return s / m;
  };

  // deepest selected generation per point
  std::vector<int> depth(n, 0);
  for (int k = 1; k <= K; ++k)
    for (const SelectedCube& sel : dec.forest.generations[k - 1])
      for (int p : system.cube(sel.cube).members) depth[p] = k;

  Eigen::VectorXd g2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mid = Eigen::VectorXd::Zero(n);
  for (int p : system.cube(root_cube).members) {
    g2(p) = f(p) - averaged_heat(depth[p], p);
    for (int k = 1; k <= depth[p]; ++k)
      mid(p) += averaged_heat(k, p) - averaged_heat(k - 1, p);
  }

  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  for (int k = 1; k <= K; ++k)
    for (int i = 1; i <= m; ++i)
      for (int ci : dec.grading.slot_families[k - 1][i - 1]) {
        const DyadicCube& q = system.cube(ci);
        const Eigen::VectorXd& fine = dec.forest.heat_at_level(q.level);
        for (int p : q.members) {
          const double coarse =
              dec.forest.heat_at_level(slot_level(k - 1, i, p))(p);
          h(p) += (fine(p) - coarse) / m;
        }
      }

  dec.reconstruction_residual = (g2 + mid - target).cwiseAbs().maxCoeff();
  if (dec.reconstruction_residual > 1e-8)
    throw std::runtime_error(
        "averaged_decompose: telescoping identity failed, residual " +
        std::to_string(dec.reconstruction_residual));

  const Eigen::VectorXd g3 = mid - h;
  dec.g = g2 + g3;
  dec.h = h;
  dec.g2_inf = g2.cwiseAbs().maxCoeff();
  dec.g3_inf = g3.cwiseAbs().maxCoeff();
  return dec;
}

Decomposition global_decompose(const Operator& op, const Eigen::VectorXd& f,
                               const LatticeEnsemble& ensemble, double eps,
                               const SpaceAnalysis* analysis) {
  const Space& space = *ensemble.space;
  SpaceAnalysis local;
  if (!analysis) {
    local = analyze_space(space);
    analysis = &local;
  }
  Decomposition dec;
  dec.epsilon = eps;
  const double norm = bmo_norm(op, f, analysis->balls).first;
  dec.lambda0 = 2.0 * norm;

  // entry requirement over every member's coarsest cubes
  double entry = 0.0;
  for (const DyadicSystem& sys : ensemble.systems)
    for (int ci : sys.levels.front())
      entry = std::max(entry, dilated_oscillation_average(op, f, sys, ci));
  dec.lambda = std::max(dec.lambda0, entry * (1.0 + 1e-9));

  const int n = space.size();
  Eigen::VectorXd g_sum = Eigen::VectorXd::Zero(n);
  for (const DyadicSystem& sys : ensemble.systems) {
    Eigen::VectorXd g_omega = Eigen::VectorXd::Zero(n);
    for (int ci : sys.levels.front()) {
      AveragedDecomposition part =
          averaged_decompose(op, f, sys, ci, dec.lambda, eps, analysis);
      const DyadicCube& q = sys.cube(ci);
      const Eigen::VectorXd& coarse = part.forest.heat_at_level(q.level);
      for (int p : q.members) g_omega(p) += coarse(p) + part.g(p);
      dec.window_violations += part.forest.window_violations;
      dec.entry_violations += part.forest.entry_violations;
    }
    g_sum += g_omega;
  }
  dec.g = g_sum / ensemble.systems.size();
  dec.h = f - dec.g;
  dec.g_inf = dec.g.cwiseAbs().maxCoeff();
  dec.h_bmo = bmo_norm(op, dec.h, analysis->balls).first;
  dec.A1_measured = dec.lambda0 > 0.0 ? dec.g_inf / dec.lambda0 : 0.0;
  dec.A2_measured = eps > 0.0 ? dec.h_bmo / eps : 0.0;
  return dec;
}

}  // namespace bmol
