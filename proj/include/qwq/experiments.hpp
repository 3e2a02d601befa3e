// qwq/experiments.hpp
// Experiment drivers behind the qwq command-line tool: each run_* returns a
// ResultTable that serializes to CSV or JSON byte-identically across reruns.

#pragma once

#include "qwq/closed_forms.hpp"
#include "qwq/model.hpp"
#include "qwq/quantifiers.hpp"
#include "qwq/walk.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace qwq::experiments {

inline constexpr const char* kArtifactVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

using Cell = std::variant<double, std::string>;
using Json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Json meta = Json::object();

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw std::logic_error("ResultTable: row width does not match the column schema");
    }
    rows.push_back(std::move(row));
  }

  /// `#`-prefixed metadata lines, then a header and one line per row.
  void write_csv(std::ostream& os) const {
    for (const auto& [key, value] : meta.items()) os << "# " << key << ": " << value.dump() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        if (const double* d = std::get_if<double>(&row[i])) {
          os << format_number(*d);
        } else {
          os << quote(std::get<std::string>(row[i]));
        }
      }
      os << '\n';
    }
  }

  Json to_json() const {
    Json rows_json = Json::array();
    for (const auto& row : rows) {
      Json r = Json::array();
      for (const auto& cell : row) {
        std::visit([&](const auto& v) { r.push_back(v); }, cell);
      }
      rows_json.push_back(std::move(r));
    }
    return Json{{"meta", meta}, {"columns", columns}, {"rows", std::move(rows_json)}};
  }

  void write_json(std::ostream& os) const { os << to_json().dump(1) << '\n'; }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::out_of_range("ResultTable: no column " + name);
  }

  double number(std::size_t row, const std::string& name) const {
    return std::get<double>(rows.at(row).at(column(name)));
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + '"';
  }
};

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

/// Worker count: QWQ_THREADS if set to a positive integer, else the hardware
/// concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("QWQ_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(0..n-1) on the worker pool; results come back in index order.
template <typename F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Seeded sampling
// ---------------------------------------------------------------------------

/// mt19937_64 with a library-independent mapping to doubles, so seeded runs
/// agree across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on the sphere: theta uniform, cos(phi) uniform.
  ObservableDirection direction() {
    const double theta = uniform(0.0, 2.0 * kPi);
    const double phi = std::acos(std::clamp(1.0 - 2.0 * uniform(), -1.0, 1.0));
    return {theta, phi};
  }

  /// G G^dagger / Tr, G with entries uniform in the unit square.
  DensityMatrix density_matrix(Index dim) {
    Eigen::MatrixXcd g(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) g(i, j) = cplx(uniform(-1, 1), uniform(-1, 1));
    Eigen::MatrixXcd rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class Experiment {
  fidelity_table,
  walk_profile,
  joint_dist,
  conditional_dist,
  quantifier_sweep,
  irreality_map,
  rbn_contexts,
  validate
};

inline const std::map<Experiment, std::string>& experiment_names() {
  static const std::map<Experiment, std::string> names = {
      {Experiment::fidelity_table, "fidelity-table"},
      {Experiment::walk_profile, "walk-profile"},
      {Experiment::joint_dist, "joint-dist"},
      {Experiment::conditional_dist, "conditional-dist"},
      {Experiment::quantifier_sweep, "quantifier-sweep"},
      {Experiment::irreality_map, "irreality-map"},
      {Experiment::rbn_contexts, "rbn-contexts"},
      {Experiment::validate, "validate"}};
  return names;
}

inline const std::string& to_string(Experiment e) { return experiment_names().at(e); }

struct ExperimentConfig {
  Experiment experiment = Experiment::validate;
  double sigma0 = 5.0;
  double alpha = 3 * kPi / 4;
  double epsilon = 1.0;
  std::vector<double> sigma0_list{1, 2, 3, 5, 10};
  std::vector<int> t_list{50, 100};
  std::vector<double> epsilon_list{1.0, 0.8};
  int t_max = 100;
  int t_step = 1;
  int theta_points = 64;  // optimizer grid
  int phi_points = 32;
  int map_theta_points = 129;  // irreality-map grid
  int map_phi_points = 65;
  int directions = 200;
  std::uint64_t seed = 42;
  bool exact = false;

  static ExperimentConfig defaults(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
      case Experiment::fidelity_table: break;
      case Experiment::walk_profile: c.t_max = 100; break;
      case Experiment::joint_dist: c.t_max = 20; break;
      case Experiment::conditional_dist: c.t_list = {4, 25}; break;
      case Experiment::quantifier_sweep: c.sigma0 = 20; c.t_max = 100; break;
      case Experiment::irreality_map: break;
      case Experiment::rbn_contexts: c.sigma0 = 20; c.t_max = 100; break;
      case Experiment::validate: c.epsilon = 0.8; break;
    }
    return c;
  }

  OptimizationConfig optimizer() const {
    OptimizationConfig o;
    o.theta_points = theta_points;
    o.phi_points = phi_points;
    return o;
  }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
    };
    positive(sigma0, "sigma0");
    for (double s : sigma0_list) positive(s, "sigma0 list entries");
    for (int t : t_list)
      if (t < 0) throw std::invalid_argument("t list entries must be nonnegative");
    auto eps_ok = [](double e) { return e >= 0.0 && e <= 1.0; };
    if (!eps_ok(epsilon)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    for (double e : epsilon_list)
      if (!eps_ok(e)) throw std::invalid_argument("epsilon list entries must lie in [0, 1]");
    if (!(alpha >= 0.0 && alpha <= kPi)) throw std::invalid_argument("alpha must lie in [0, pi]");
    if (t_max < 0) throw std::invalid_argument("t-max must be nonnegative");
    if (t_step < 1) throw std::invalid_argument("t-step must be at least 1");
    if (map_theta_points < 2 || map_phi_points < 2) {
      throw std::invalid_argument("map grid needs at least 2 points per angle");
    }
    if (directions < 1) throw std::invalid_argument("directions must be positive");
    optimizer().validate();
  }
};

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

/// Frozen column sets; validate compares live output against these.
inline std::vector<std::string> expected_columns(Experiment e, bool exact = false) {
  switch (e) {
    case Experiment::fidelity_table: return {"sigma0", "t", "fidelity"};
    case Experiment::walk_profile: return {"x", "p", "p_up", "p_down"};
    case Experiment::joint_dist: return {"x1", "x2", "p_singlet", "p_product"};
    case Experiment::conditional_dist: return {"t", "x", "p", "p_up", "p_down"};
    case Experiment::quantifier_sweep: {
      std::vector<std::string> c = {"epsilon", "t", "tau", "B", "S", "E", "D_norm", "N_norm"};
      if (exact) {
        for (const char* n : {"B_exact", "S_exact", "E_exact", "D_norm_exact", "N_norm_exact"}) c.push_back(n);
      }
      return c;
    }
    case Experiment::irreality_map: return {"theta", "phi", "nu", "irreality"};
    case Experiment::rbn_contexts:
      return {"t", "tau", "eta_yy", "eta_zz", "eta_cc", "eta_ay", "eta_xy", "eta_zx", "eta_cy"};
    case Experiment::validate: return {"check", "deviation", "tolerance", "pass"};
  }
  return {};
}

namespace detail {

inline ResultTable make_table(const ExperimentConfig& cfg, bool exact = false) {
  ResultTable table;
  table.columns = expected_columns(cfg.experiment, exact);
  table.meta["experiment"] = to_string(cfg.experiment);
  table.meta["schema_version"] = kSchemaVersion;
  table.meta["artifact_version"] = kArtifactVersion;
  return table;
}

inline std::vector<int> time_grid(const ExperimentConfig& cfg) {
  std::vector<int> ts;
  for (int t = 0; t <= cfg.t_max; t += cfg.t_step) ts.push_back(t);
  return ts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared simulation helpers
// ---------------------------------------------------------------------------

/// Exact two-walker state at time t from the singlet-spin Gaussian start.
inline ProductSumState exact_pair(double sigma0, int t) {
  return evolve_two(singlet_gaussian_pair(sigma0, window_for_horizon(sigma0, t)), t);
}

inline DensityMatrix spin_state(const ProductSumState& state) {
  return reduced_state(state, Bipartition(Bipartition::S1 | Bipartition::S2));
}

/// |<model|exact>|^2 for the two-walker state.
inline double two_walker_fidelity(double sigma0, int t) {
  const LatticeWindow w = window_for_horizon(sigma0, t);
  const auto exact = evolve_two(singlet_gaussian_pair(sigma0, w), t);
  return fidelity(exact, two_walker_model_state(sigma0, t, w));
}

inline double single_walker_fidelity(double sigma0, double alpha, int t) {
  const LatticeWindow w = window_for_horizon(sigma0, t);
  const WalkerState exact = evolve(gaussian_walker(sigma0, alpha, w), t);
  return fidelity(exact, model_state({sigma0, alpha, t}, w));
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

inline ResultTable run_fidelity_table(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg);
  table.meta["sigma0_list"] = cfg.sigma0_list;
  table.meta["t_list"] = cfg.t_list;
  const std::size_t nt = cfg.t_list.size();
  const auto values = parallel_map(cfg.sigma0_list.size() * nt, [&](std::size_t k) {
    return two_walker_fidelity(cfg.sigma0_list[k / nt], cfg.t_list[k % nt]);
  });
  for (std::size_t k = 0; k < values.size(); ++k) {
    table.add_row({cfg.sigma0_list[k / nt], double(cfg.t_list[k % nt]), values[k]});
  }
  return table;
}

inline ResultTable run_walk_profile(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg);
  table.meta["sigma0"] = cfg.sigma0;
  table.meta["alpha"] = cfg.alpha;
  table.meta["t"] = cfg.t_max;
  const LatticeWindow w = window_for_horizon(cfg.sigma0, cfg.t_max);
  const WalkerState psi = evolve(gaussian_walker(cfg.sigma0, cfg.alpha, w), cfg.t_max);
  const auto& amps = psi.amplitudes();
  for (Index i = 0; i < w.size(); ++i) {
    const double up = std::norm(amps(0, i)), down = std::norm(amps(1, i));
    table.add_row({double(w.site(i)), up + down, up, down});
  }
  return table;
}

inline ResultTable run_joint_dist(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg);
  table.meta["sigma0"] = cfg.sigma0;
  table.meta["t"] = cfg.t_max;
  const LatticeWindow w = window_for_horizon(cfg.sigma0, cfg.t_max);
  const auto singlet = joint_distribution(evolve_two(singlet_gaussian_pair(cfg.sigma0, w), cfg.t_max));
  const auto product = joint_distribution(evolve_two(product_gaussian_pair(cfg.sigma0, w), cfg.t_max));
  for (Index i = 0; i < w.size(); ++i)
    for (Index j = 0; j < w.size(); ++j)
      table.add_row({double(w.site(i)), double(w.site(j)), singlet(i, j), product(i, j)});
  return table;
}

inline ResultTable run_conditional_dist(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg);
  table.meta["sigma0"] = cfg.sigma0;
  table.meta["t_list"] = cfg.t_list;
  table.meta["walker"] = 1;
  for (int t : cfg.t_list) {
    const auto state = exact_pair(cfg.sigma0, t);
    const auto up = conditional_spin_distribution(state, Walker::first, Spin::up);
    const auto down = conditional_spin_distribution(state, Walker::first, Spin::down);
    const auto& w = state.left_window();
    for (Index i = 0; i < w.size(); ++i) table.add_row({double(t), double(w.site(i)), up(i) + down(i), up(i), down(i)});
  }
  return table;
}

inline Json death_times_json(double eps, double sigma0) {
  const auto d = sudden_death_times(eps, sigma0);
  auto entry = [&](const std::optional<double>& v) {
    if (!v) return Json{{"t", nullptr}, {"tau", nullptr}};
    return Json{{"t", *v}, {"tau", *v / sigma0}};
  };
  return Json{{"bell", entry(d.bell)}, {"steering", entry(d.steering)}, {"entanglement", entry(d.entanglement)}};
}

/// Closed-form B, S, E, D/ln2, N/ln2 on t = 0..t_max (tau = t/sigma0), with
/// optional columns from the exact walk's two-spin state mixed with noise.
inline ResultTable run_quantifier_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg, cfg.exact);
  table.meta["sigma0"] = cfg.sigma0;
  table.meta["epsilon_list"] = cfg.epsilon_list;
  table.meta["t_max"] = cfg.t_max;
  table.meta["t_step"] = cfg.t_step;
  Json markers = Json::object();
  for (double eps : cfg.epsilon_list) markers[format_number(eps)] = death_times_json(eps, cfg.sigma0);
  table.meta["sudden_death"] = markers;
  const auto ts = detail::time_grid(cfg);

  std::vector<DensityMatrix> exact_spins;
  if (cfg.exact) {
    table.meta["optimizer_grid"] = {cfg.theta_points, cfg.phi_points};
    exact_spins = parallel_map(ts.size(), [&](std::size_t k) { return spin_state(exact_pair(cfg.sigma0, ts[k])); });
  }
  const double s0 = cfg.sigma0;
  const std::size_t nt = ts.size();
  const auto rows = parallel_map(cfg.epsilon_list.size() * nt, [&](std::size_t k) {
    const double eps = cfg.epsilon_list[k / nt];
    const int t = ts[k % nt];
    std::vector<Cell> row = {eps,
                             double(t),
                             t / s0,
                             bell_closed(eps, s0, t),
                             steering_closed(eps, s0, t),
                             concurrence_closed(eps, s0, t),
                             discord_closed(eps, s0, t) / kLn2,
                             rbn_closed(eps, s0, t) / kLn2};
    if (cfg.exact) {
      const DensityMatrix rho = werner_mixture(eps, exact_spins[k % nt]);
      row.insert(row.end(), {bell_nonlocality(rho), epr_steering(rho), concurrence(rho),
                             symmetric_discord(rho, cfg.optimizer()).value / kLn2,
                             qwq::rbn(rho, cfg.optimizer()).value / kLn2});
    }
    return row;
  });
  for (auto row : rows) table.add_row(std::move(row));
  return table;
}

inline ResultTable run_irreality_map(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg);
  table.meta["theta_points"] = cfg.map_theta_points;
  table.meta["phi_points"] = cfg.map_phi_points;
  table.meta["epsilon"] = 1.0;
  table.meta["limit"] = "t -> infinity";
  for (int i = 0; i < cfg.map_theta_points; ++i) {
    const double theta = 2.0 * kPi * i / cfg.map_theta_points;
    for (int j = 0; j < cfg.map_phi_points; ++j) {
      const double phi = kPi * j / (cfg.map_phi_points - 1);
      table.add_row({theta, phi, nu(theta, phi), irreality_asymptotic(theta, phi)});
    }
  }
  return table;
}

/// The seven measurement contexts of the realism-based nonlocality plot.
/// c = (x+z)/sqrt2 is the coin axis, a = (x-z)/sqrt2 the orthogonal one.
inline std::vector<std::pair<std::string, MeasurementContext>> rbn_context_set() {
  const auto x = ObservableDirection::x_axis();
  const auto y = ObservableDirection::y_axis();
  const auto z = ObservableDirection::z_axis();
  const auto c = ObservableDirection::from_vector({1, 0, 1});
  const auto a = ObservableDirection::from_vector({1, 0, -1});
  return {{"eta_yy", {y, y}}, {"eta_zz", {z, z}}, {"eta_cc", {c, c}}, {"eta_ay", {a, y}},
          {"eta_xy", {x, y}}, {"eta_zx", {z, x}}, {"eta_cy", {c, y}}};
}

inline ResultTable run_rbn_contexts(const ExperimentConfig& cfg) {
  cfg.validate();
  auto table = detail::make_table(cfg);
  table.meta["sigma0"] = cfg.sigma0;
  table.meta["epsilon"] = cfg.epsilon;
  table.meta["t_max"] = cfg.t_max;
  table.meta["t_step"] = cfg.t_step;
  table.meta["normalization"] = "ln 2";
  Json contexts = Json::object();
  for (const auto& [name, ctx] : rbn_context_set()) {
    contexts[name] = {{"A", {ctx.dir_a.theta(), ctx.dir_a.phi()}}, {"B", {ctx.dir_b.theta(), ctx.dir_b.phi()}}};
  }
  table.meta["contexts"] = contexts;
  const auto set = rbn_context_set();
  for (int t : detail::time_grid(cfg)) {
    const DensityMatrix rho = werner_state(cfg.epsilon, cfg.sigma0, t);
    std::vector<Cell> row = {double(t), t / cfg.sigma0};
    for (const auto& [name, ctx] : set) row.push_back(contextual_rbn(rho, ctx) / kLn2);
    table.add_row(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  double deviation;
  double tolerance;
  bool pass() const { return deviation <= tolerance; }
};

namespace detail {

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Non-optimized mutual-information loss I(rho) - I(Phi(rho)), dense.
inline double mutual_information_loss(const DensityMatrix& rho, Side side, const ObservableDirection& dir) {
  const std::array<int, 2> dims{2, 2};
  auto mi = [&](const DensityMatrix& r) {
    const std::array<int, 1> a{0}, b{1};
    return von_neumann_entropy(partial_trace(r, dims, a)) + von_neumann_entropy(partial_trace(r, dims, b)) -
           von_neumann_entropy(r);
  };
  return mi(rho) - mi(measure_map(rho, side, dir));
}

}  // namespace detail

/// Engine checks run at fixed reference parameters; model checks use the
/// configured sigma0 and epsilon.
inline std::vector<Check> validation_checks(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Check> checks;
  auto add = [&](std::string name, double dev, double tol) { checks.push_back({std::move(name), dev, tol}); };
  const OptimizationConfig opt = cfg.optimizer();
  Rng rng(cfg.seed);

  // --- engine: unitarity and support ---------------------------------------
  {
    const auto h = CoinOperator::hadamard().matrix();
    add("coin_unitary", detail::max_abs(h.adjoint() * h - Eigen::Matrix2cd::Identity()), tol::kUnitary);
    const double s0 = 5.0;
    const int horizon = 100;
    const LatticeWindow w = window_for_horizon(s0, horizon);
    WalkerState psi = gaussian_walker(s0, 3 * kPi / 4, w);
    const int radius = gaussian_support_radius(s0);
    double norm_dev = 0.0, outside = 0.0;
    for (int t = 1; t <= horizon; ++t) {
      psi = step(psi);
      norm_dev = std::max(norm_dev, std::abs(psi.norm_squared() - 1.0));
      for (Index i = 0; i < w.size(); ++i) {
        if (std::abs(w.site(i)) > radius + t) outside = std::max(outside, psi.amplitudes().col(i).norm());
      }
    }
    add("unitarity_single_walker", norm_dev, 1e-12);
    add("support_bound", outside, 0.0);
  }

  // --- engine: low-rank vs dense, reduced states ---------------------------
  {
    const double s0 = 2.0;
    const int horizon = 20;
    const LatticeWindow w = window_for_horizon(s0, horizon);
    const Index l = w.size();
    ProductSumState state = singlet_gaussian_pair(s0, w);
    Eigen::VectorXcd dense = to_dense(state);
    double amp_dev = 0.0, norm_dev = 0.0;
    double trace_psd_dev = 0.0, gram_dev = 0.0, complement_dev = 0.0, ptrace_dev = 0.0, marginal_dev = 0.0;
    const std::array<int, 4> dims = {2, 2, int(l), int(l)};
    for (int t = 0; t <= horizon; ++t) {
      if (t > 0) {
        state = evolve_two(state, 1);
        dense = dense_evolve_two(dense, l, l, 1);
      }
      amp_dev = std::max(amp_dev, (to_dense(state) - dense).cwiseAbs().maxCoeff());
      norm_dev = std::max(norm_dev, std::abs(state.norm_squared() - 1.0));
      if (t % 5 != 0) continue;
      for (const auto& part : Bipartition::canonical()) {
        const DensityMatrix rho = reduced_state(state, part);
        trace_psd_dev = std::max({trace_psd_dev, std::abs(rho.matrix().trace().real() - 1.0),
                                  std::max(0.0, -rho.min_eigenvalue())});
        const double p = purity_of_part(state, part);
        gram_dev = std::max(gram_dev, std::abs(p - rho.purity()));
        complement_dev = std::max(complement_dev, std::abs(p - purity_of_part(state, part.complement())));
        std::vector<int> keep;
        for (int f = 0; f < 4; ++f)
          if (part.mask() & (1u << f)) keep.push_back(f);
        ptrace_dev = std::max(ptrace_dev, detail::max_abs(partial_trace(dense, dims, keep).matrix() - rho.matrix()));
      }
      const Eigen::VectorXd marginal = joint_distribution(state).rowwise().sum();
      const Eigen::VectorXd split = conditional_spin_distribution(state, Walker::first, Spin::up) +
                                    conditional_spin_distribution(state, Walker::first, Spin::down);
      marginal_dev = std::max(marginal_dev, (marginal - split).cwiseAbs().maxCoeff());
    }
    add("low_rank_vs_dense_amplitudes", amp_dev, 1e-12);
    add("unitarity_two_walker", norm_dev, 1e-12);
    add("reduced_state_trace_psd", trace_psd_dev, 1e-10);
    add("gram_purity_vs_dense", gram_dev, 1e-10);
    add("complementary_purities", complement_dev, 1e-10);
    add("partial_trace_vs_dense", ptrace_dev, 1e-12);
    add("spin_resolved_marginals", marginal_dev, 1e-12);
  }

  // --- engine: center-of-mass factorization -------------------------------
  add("cm_factorization_exact", 0.99 - cm_relative_factorization_check(exact_pair(5.0, 50)), 0.0);

  // --- quantifiers on random states ---------------------------------------
  {
    double tsirelson = -std::numeric_limits<double>::infinity();
    double idempotence = 0.0, commutation = 0.0, decomposition = 0.0, eta_zero = 0.0, fast_dev = 0.0;
    const std::array<int, 2> dims{2, 2};
    const std::array<int, 1> keep_a{0};
    for (int k = 0; k < 50; ++k) {
      const DensityMatrix rho = rng.density_matrix(4);
      const auto da = rng.direction(), db = rng.direction();
      tsirelson = std::max(tsirelson, chsh_value(rho, da, rng.direction(), db, rng.direction()) - 2.0 * kSqrt2);
      const DensityMatrix ma = measure_map(rho, Side::A, da);
      const DensityMatrix mb = measure_map(rho, Side::B, db);
      idempotence = std::max(idempotence, detail::max_abs(measure_map(ma, Side::A, da).matrix() - ma.matrix()));
      commutation = std::max(commutation, detail::max_abs(measure_map(ma, Side::B, db).matrix() -
                                                          measure_map(mb, Side::A, da).matrix()));
      const DensityMatrix rho_a = partial_trace(rho, dims, keep_a);
      const std::array<int, 1> single{2};
      const double local = irreality(rho_a, single, 0, da);
      decomposition = std::max(decomposition, std::abs(irreality(rho, da, Side::A) - local -
                                                       detail::mutual_information_loss(rho, Side::A, da)));
      const MeasurementContext ctx{da, db};
      eta_zero = std::max({eta_zero, std::abs(contextual_rbn(ma, ctx)), std::abs(contextual_rbn(mb, ctx))});
      const MeasuredEntropies fast(rho);
      fast_dev = std::max({fast_dev, std::abs(fast.measured_a(da.unit()) - von_neumann_entropy(ma)),
                           std::abs(fast.measured_b(db.unit()) - von_neumann_entropy(mb)),
                           std::abs(fast.measured_ab(da.unit(), db.unit()) -
                                    von_neumann_entropy(measure_map(rho, ctx)))});
    }
    // Maximal violation on the singlet with optimal settings.
    const DensityMatrix singlet = DensityMatrix::pure(bell::b4());
    const ChshSettings best{ObservableDirection(0, kPi / 2), ObservableDirection(0, 0),
                            ObservableDirection(kPi, 3 * kPi / 4), ObservableDirection(kPi, kPi / 4)};
    add("tsirelson_bound", std::max(tsirelson, chsh_value(singlet, best) - 2.0 * kSqrt2), 1e-9);
    add("measure_map_idempotence", idempotence, 1e-12);
    add("measure_map_commutation", commutation, 1e-12);
    add("irreality_decomposition", decomposition, 1e-9);
    add("eta_vanishes_on_measured_states", eta_zero, 1e-10);
    add("measured_entropy_fast_vs_dense", fast_dev, 1e-10);
  }

  // --- quantifiers on the noisy two-spin state ----------------------------
  {
    int hierarchy_violations = 0;
    double n_minus_d = -std::numeric_limits<double>::infinity();
    double side_symmetry = 0.0, irreality_bound = -std::numeric_limits<double>::infinity();
    double algebraic = 0.0, optimized = 0.0;
    std::vector<double> eps_grid = {0.5, 0.8, 0.9, 1.0};
    if (std::find(eps_grid.begin(), eps_grid.end(), cfg.epsilon) == eps_grid.end()) eps_grid.push_back(cfg.epsilon);
    const double s0 = cfg.sigma0;
    const auto probe_dirs = qwq::detail::direction_grid(OptimizationConfig{16, 8, 0, 1e-9});
    for (double eps : eps_grid) {
      for (double tau : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        const double t = tau * s0;
        const DensityMatrix rho = werner_state(eps, s0, t);
        const double b = bell_nonlocality(rho), s = epr_steering(rho), e = concurrence(rho);
        const double d = quantum_discord(rho, Side::B, opt).value;
        const double d_a = quantum_discord(rho, Side::A, opt).value;
        const double n = qwq::rbn(rho, opt).value;
        const bool ok = (!(b > 0) || s > 0) && (!(s > 0) || e > 0) && (!(e > 0) || d > 1e-9) && (!(d > 1e-9) || n > 1e-9);
        hierarchy_violations += ok ? 0 : 1;
        n_minus_d = std::max(n_minus_d, d - n);
        side_symmetry = std::max(side_symmetry, std::abs(d - d_a));
        for (const auto& v : probe_dirs) {
          irreality_bound = std::max(irreality_bound, d - irreality(rho, ObservableDirection::from_vector(v)));
        }
        algebraic = std::max({algebraic, std::abs(b - bell_closed(eps, s0, t)),
                              std::abs(s - steering_closed(eps, s0, t)), std::abs(e - concurrence_closed(eps, s0, t)),
                              std::abs(rho.purity() - purity_closed(eps, s0, t)),
                              std::abs(von_neumann_entropy(rho) - entropy_closed(eps, s0, t))});
        optimized = std::max({optimized, std::abs(d - discord_closed(eps, s0, t)), std::abs(n - rbn_closed(eps, s0, t))});
      }
    }
    add("hierarchy_chain", hierarchy_violations, 0);
    add("rbn_at_least_discord", n_minus_d, 1e-9);
    add("discord_side_symmetry", side_symmetry, 1e-6);
    add("irreality_bounds_discord", irreality_bound, 1e-6);
    add("closed_vs_numeric_algebraic", algebraic, 1e-9);
    add("closed_vs_numeric_optimized", optimized, 1e-6);
  }

  // --- closed forms: chronology -------------------------------------------
  {
    double worst = -std::numeric_limits<double>::infinity();
    const double lo = 1.0 / kSqrt2;
    for (int k = 1; k <= 100; ++k) {
      const double eps = lo + (1.0 - lo) * k / 101.0;
      const auto d = sudden_death_times(eps, cfg.sigma0);
      if (!d.bell || !d.steering || !d.entanglement) {
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max({worst, *d.bell - *d.steering, *d.steering - *d.entanglement});
    }
    // Strict ordering: the largest gap difference must be negative.
    add("sudden_death_chronology", worst, -1e-12);
  }

  // --- model checks at the configured sigma0 ------------------------------
  {
    const double s0 = cfg.sigma0;
    add("model_two_walker_fidelity_t50", 0.96 - two_walker_fidelity(s0, 50), 0.0);
    add("model_single_walker_fidelity_t50", 0.96 - single_walker_fidelity(s0, cfg.alpha, 50), 0.0);
    double comp_model = 0.0, comp_exact = 0.0;
    for (double tau : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const int t = static_cast<int>(std::lround(tau * s0));
      const auto model = two_walker_model_state(s0, t);
      const double g_m = gme_concurrence(model);
      comp_model = std::max(comp_model, std::abs(g_m * g_m + concurrence(spin_state(model)) - 1.0));
      const auto exact = exact_pair(s0, t);
      const double g_e = gme_concurrence(exact);
      comp_exact = std::max(comp_exact, std::abs(g_e * g_e + concurrence(spin_state(exact)) - 1.0));
    }
    add("complementarity_model", comp_model, 1e-6);
    add("complementarity_exact", comp_exact, 5e-3);
    const int t_far = static_cast<int>(std::lround(10 * s0));
    const auto far = two_walker_model_state(s0, t_far);
    add("cm_factorization_model", std::abs(cm_relative_factorization_check(far) - 1.0), 1e-10);
    const Eigen::Vector4cd s_plus = (bell::beta23() + bell::b4()) / kSqrt2;
    const double collapse =
        (s_plus.adjoint() * conditional_spin_on_sign(far, RelativeSign::positive).matrix() * s_plus)(0, 0).real();
    add("sign_collapse_to_s_plus", 0.999 - collapse, 0.0);
  }

  // --- irreality ----------------------------------------------------------
  {
    const double s0 = cfg.sigma0;
    const DensityMatrix rho0 = werner_state(1.0, s0, 0.0);
    const DensityMatrix rho_inf = spin_density_closed(s0, std::numeric_limits<double>::infinity());
    double gap_max = -std::numeric_limits<double>::infinity(), gap_min = std::numeric_limits<double>::infinity();
    int accepted = 0;
    while (accepted < cfg.directions) {
      const auto dir = rng.direction();
      try {
        for (int k = 0; k <= 50; ++k) {
          const double tau = 0.1 * k;
          const double scaled = scaled_irreality(werner_state(1.0, s0, tau * s0), rho0, rho_inf, dir);
          const double gap = discord_closed(1.0, s0, tau * s0) / kLn2 - scaled;
          gap_max = std::max(gap_max, gap);
          gap_min = std::min(gap_min, gap);
        }
        ++accepted;
      } catch (const InadmissibleDirection&) {
      }
    }
    add("scaled_irreality_gap_below_0.03", gap_max, 0.03);
    add("scaled_irreality_gap_nonnegative", -gap_min, 1e-9);
    const double zero_dev = std::max(irreality(rho_inf, ObservableDirection(0, kPi / 4)),
                                     irreality(rho_inf, ObservableDirection(kPi, 3 * kPi / 4)));
    add("asymptotic_irreality_zeros", zero_dev, 1e-9);
    add("asymptotic_irreality_max", std::abs(irreality(rho_inf, ObservableDirection::y_axis()) - kLn2), 1e-9);
  }
  return checks;
}

inline ResultTable run_experiment(const ExperimentConfig& cfg);

/// Runs every experiment on a tiny configuration and compares its columns
/// and schema version against the frozen schema.
inline int schema_drift_count() {
  int drift = 0;
  for (const auto& [e, name] : experiment_names()) {
    if (e == Experiment::validate) continue;
    for (bool exact : {false, true}) {
      if (exact && e != Experiment::quantifier_sweep) continue;
      auto c = ExperimentConfig::defaults(e);
      c.sigma0 = 2;
      c.sigma0_list = {3};
      c.t_list = {2};
      c.t_max = 2;
      c.epsilon_list = {1.0};
      c.theta_points = 16;
      c.phi_points = 8;
      c.map_theta_points = 4;
      c.map_phi_points = 3;
      c.exact = exact;
      const ResultTable table = run_experiment(c);
      if (table.columns != expected_columns(e, exact) || table.meta.value("schema_version", -1) != kSchemaVersion ||
          table.meta.value("experiment", std::string()) != name) {
        ++drift;
      }
      for (const auto& row : table.rows) drift += row.size() != table.columns.size();
    }
  }
  return drift;
}

inline ResultTable run_validate(const ExperimentConfig& cfg) {
  auto table = detail::make_table(cfg);
  table.meta["sigma0"] = cfg.sigma0;
  table.meta["epsilon"] = cfg.epsilon;
  table.meta["alpha"] = cfg.alpha;
  table.meta["seed"] = cfg.seed;
  table.meta["directions"] = cfg.directions;
  table.meta["optimizer_grid"] = {cfg.theta_points, cfg.phi_points};
  auto checks = validation_checks(cfg);
  checks.push_back({"schema_stability", double(schema_drift_count()), 0.0});
  int failed = 0;
  for (const auto& c : checks) {
    table.add_row({c.name, c.deviation, c.tolerance, std::string(c.pass() ? "true" : "false")});
    failed += c.pass() ? 0 : 1;
  }
  table.meta["failed"] = failed;
  return table;
}

inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::fidelity_table: return run_fidelity_table(cfg);
    case Experiment::walk_profile: return run_walk_profile(cfg);
    case Experiment::joint_dist: return run_joint_dist(cfg);
    case Experiment::conditional_dist: return run_conditional_dist(cfg);
    case Experiment::quantifier_sweep: return run_quantifier_sweep(cfg);
    case Experiment::irreality_map: return run_irreality_map(cfg);
    case Experiment::rbn_contexts: return run_rbn_contexts(cfg);
    case Experiment::validate: return run_validate(cfg);
  }
  throw std::invalid_argument("unknown experiment");
}

}  // namespace qwq::experiments
