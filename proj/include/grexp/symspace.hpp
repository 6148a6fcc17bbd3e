#pragma once

#include <grexp/catalog.hpp>
#include <grexp/free_lie.hpp>
#include <grexp/lie_core.hpp>
#include <grexp/matrix_functions.hpp>
#include <grexp/star_engine.hpp>
#include <grexp/weights.hpp>

#include <json.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

// ---------------------------------------------------------------------------
// Points of p, exact and floating.

inline Vector<double> to_double_vector(const RVector& v) {
  Vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = to_double(v[i]);
  return r;
}

inline double norm2(const Vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Random point of p with small rational coordinates num/den.
inline RVector random_rational_p(const SymmetricPair& pair, std::mt19937_64& rng, int max_num = 4, int max_den = 3) {
  std::uniform_int_distribution<int> num(-max_num, max_num), den(1, max_den);
  RVector c(pair.p_indices().size());
  for (auto& x : c) x = Rational(num(rng), den(rng));
  return pair.embed_p(c);
}

/// Random point of p with Euclidean coordinate norm `radius`.
inline Vector<double> random_p(const SymmetricPair& pair, std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> gauss;
  Vector<double> c(pair.p_indices().size());
  double n = 0;
  while (n == 0) {
    for (auto& x : c) x = gauss(rng);
    n = norm2(c);
  }
  for (auto& x : c) x *= radius / n;
  return pair.embed_p(c);
}

inline void require_in_p(const SymmetricPair& pair, const Vector<double>& x, const char* what, double tol = 1e-12) {
  pair.algebra().check_vector(x.size());
  if (norm2(pair.project_k(x)) > tol * std::max(1.0, norm2(x)))
    throw std::invalid_argument(std::string(what) + " is not in p");
}

inline void require_in_p(const SymmetricPair& pair, const RVector& x, const char* what) {
  pair.algebra().check_vector(x.size());
  for (int i : pair.k_indices())
    if (!is_zero(x[i])) throw std::invalid_argument(std::string(what) + " is not in p");
}

// ---------------------------------------------------------------------------
// Symmetric BCH, matrix side.

inline constexpr double kZsymOracleRadius = 0.1;

/// (1/2) log(exp(x) exp(2y) exp(x)) in coordinates.
inline Vector<double> zsym_matrix_oracle(const SymmetricPair& pair, const Vector<double>& x, const Vector<double>& y) {
  if (norm2(x) > kZsymOracleRadius || norm2(y) > kZsymOracleRadius)
    throw std::out_of_range("zsym_matrix_oracle needs |x|, |y| <= 0.1");
  const MatrixCoordinates mc(pair.algebra());
  const Eigen::MatrixXd ex = expm(mc.to_matrix(x));
  const Eigen::MatrixXd l = logm(ex * expm(2.0 * mc.to_matrix(y)) * ex);
  auto z = mc.coordinates(l);
  for (auto& c : z) c *= 0.5;
  return z;
}

/// Same quantity from the truncated series.
inline Vector<double> zsym_series_value(const SymmetricPair& pair, const Vector<double>& x, const Vector<double>& y,
                                        int order = 8) {
  static std::map<int, LieSeriesD> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, zsym_reference(order).cast<double>()).first;
  return substitute_and_evaluate(it->second, pair.algebra(), x, y);
}

// ---------------------------------------------------------------------------
// Jacobian functions.

namespace detail {

/// sum_k a^k c_k, truncated once terms drop below 1e-18 relative.
inline Eigen::MatrixXd entire(const Eigen::MatrixXd& a, const std::function<double(int)>& coeff, int stride = 1) {
  const auto n = a.rows();
  Eigen::MatrixXd sum = coeff(0) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd pw = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd step = stride == 1 ? a : a * a;
  for (int k = 1; k < 200; ++k) {
    pw = pw * step;
    const Eigen::MatrixXd term = coeff(k) * pw;
    sum += term;
    if (term.norm() <= 1e-18 * std::max(1.0, sum.norm()) && k > 4) return sum;
  }
  throw std::domain_error("power series did not converge");
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// (1 - e^{-z}) / z, entire.
inline std::complex<double> j_scalar(std::complex<double> z) {
  if (std::abs(z) < 1e-4) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  return (1.0 - std::exp(-z)) / z;
}

/// sinh(sqrt(m)) / sqrt(m), entire in m.
inline std::complex<double> J_scalar(std::complex<double> m) {
  if (std::abs(m) < 1e-4) return 1.0 + m / 6.0 + m * m / 120.0;
  const auto r = std::sqrt(m);
  return std::sinh(r) / r;
}

inline Eigen::MatrixXd ad_double(const LieAlgebra& g, const Vector<double>& x) { return to_eigen(ad(g, x)); }

inline Eigen::MatrixXd block(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd r(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) r(i, j) = m(rows[i], cols[j]);
  return r;
}

}  // namespace detail

/// j(x) = det((1 - exp(-ad x)) / ad x), power series in ad x.
inline double j_function(const LieAlgebra& g, const Vector<double>& x) {
  if (g.dim() == 0) return 1.0;
  const auto a = detail::ad_double(g, x);
  return detail::entire(a, [](int k) { return (k % 2 ? -1.0 : 1.0) / detail::factorial(k + 1); }).determinant();
}

/// Same value from the eigenvalues of ad x.
inline double j_function_eigen(const LieAlgebra& g, const Vector<double>& x) {
  if (g.dim() == 0) return 1.0;
  const Eigen::VectorXcd ev = detail::ad_double(g, x).eigenvalues();
  std::complex<double> p = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) p *= detail::j_scalar(ev[i]);
  return p.real();
}

/// J(x) = det_p(sinh(ad x) / ad x) for x in p; (ad x)^2 preserves p.
inline double J_function(const SymmetricPair& pair, const Vector<double>& x) {
  require_in_p(pair, x, "J_function argument");
  if (pair.p_indices().empty()) return 1.0;
  const auto a = detail::ad_double(pair.algebra(), x);
  const auto s = detail::entire(a, [](int k) { return 1.0 / detail::factorial(2 * k + 1); }, 2);
  return detail::block(s, pair.p_indices(), pair.p_indices()).determinant();
}

/// Same value from the eigenvalues of (ad x)^2 on p.
inline double J_function_eigen(const SymmetricPair& pair, const Vector<double>& x) {
  require_in_p(pair, x, "J_function argument");
  if (pair.p_indices().empty()) return 1.0;
  const auto a = detail::ad_double(pair.algebra(), x);
  const Eigen::MatrixXd sq = detail::block(a * a, pair.p_indices(), pair.p_indices());
  const Eigen::VectorXcd ev = sq.eigenvalues();
  std::complex<double> p = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) p *= detail::J_scalar(ev[i]);
  return p.real();
}

/// j of the algebra with doubled bracket.
inline double j_doubled(const SymmetricPair& pair, const Vector<double>& x) {
  return j_function(doubled(pair.algebra()), x);
}

// ---------------------------------------------------------------------------
// Density of the symmetric BCH.

struct DensityReport {
  std::string pair;
  Vector<double> x, y, z;
  double J_x_half = 1, J_y = 1, J_z = 1;
  double form_doubled = 1;  // j_{g2}(x/2) j_{g2}(y)^{1/2} / j_{g2}(z)^{1/2}
  double form_J = 1;        // J(x/2)^2 J(y) / J(z)
  double residual = 0;      // |form_doubled - form_J|
  double z_k_projection = 0;
  std::string oracle;
  int truncation_order = 0;  // 0 when the matrix oracle was used

  double dsym() const { return form_J; }
};

inline nlohmann::json to_json(const DensityReport& r) {
  return {{"pair", r.pair},        {"x", r.x},
          {"y", r.y},              {"z", r.z},
          {"J_x_half", r.J_x_half}, {"J_y", r.J_y},
          {"J_z", r.J_z},          {"form_doubled", r.form_doubled},
          {"form_J", r.form_J},    {"residual", r.residual},
          {"z_k_projection", r.z_k_projection}, {"oracle", r.oracle},
          {"truncation_order", r.truncation_order}};
}

/// D_sym at (x, y) in both forms. Z_sym comes from the matrix oracle when a
/// representation exists and the point is in range, otherwise from the series
/// truncated at `order`.
inline DensityReport dsym(const SymmetricPair& pair, const Vector<double>& x, const Vector<double>& y, int order = 8) {
  require_in_p(pair, x, "x");
  require_in_p(pair, y, "y");
  DensityReport r;
  r.pair = pair.key();
  r.x = x;
  r.y = y;
  const bool matrix = pair.algebra().matrix_rep() && norm2(x) <= kZsymOracleRadius && norm2(y) <= kZsymOracleRadius;
  if (matrix) {
    r.z = zsym_matrix_oracle(pair, x, y);
    r.oracle = "matrix";
  } else {
    r.z = zsym_series_value(pair, x, y, order);
    r.oracle = "series";
    r.truncation_order = order;
  }
  r.z_k_projection = norm2(pair.project_k(r.z));
  // the oracle output is in p up to rounding; J needs an exact p-vector
  const auto z = pair.project_p(r.z);
  const auto xh = scaled(x, 0.5);
  r.J_x_half = J_function(pair, xh);
  r.J_y = J_function(pair, y);
  r.J_z = J_function(pair, z);
  r.form_J = r.J_x_half * r.J_x_half * r.J_y / r.J_z;
  r.form_doubled = j_doubled(pair, xh) * std::sqrt(j_doubled(pair, y)) / std::sqrt(j_doubled(pair, z));
  r.residual = std::abs(r.form_doubled - r.form_J);
  return r;
}

/// Density at the far end of the first deformation.
using DensityFn = std::function<double(const Vector<double>&, const Vector<double>&)>;

/// Implied E_{1/2}(x, y) = D_inf(x, y) J(x) / J(x/2)^2. Without an explicit
/// D_inf the starting density D_sym is used as the model.
inline double implied_e_half(const SymmetricPair& pair, const Vector<double>& x, const Vector<double>& y,
                             const DensityFn& d_infinity = {}) {
  require_in_p(pair, x, "x");
  require_in_p(pair, y, "y");
  const double d = d_infinity ? d_infinity(x, y) : dsym(pair, x, y).dsym();
  const double jh = J_function(pair, scaled(x, 0.5));
  return d * J_function(pair, x) / (jh * jh);
}

struct InfinityReport {
  std::vector<double> scales;
  std::vector<double> deviations;  // |E - 1| at eps x, eps y
  double fitted_exponent = 0;      // slope of log|E - 1| against log eps
};

/// Order of vanishing of E_{1/2} - 1 along (eps x, eps y).
inline InfinityReport dsym_infinity_identity(const SymmetricPair& pair, const Vector<double>& x,
                                             const Vector<double>& y, const DensityFn& d_infinity = {},
                                             std::vector<double> scales = {0.8, 0.4, 0.2, 0.1}) {
  InfinityReport r;
  r.scales = scales;
  std::vector<double> lx, ly;
  for (double s : scales) {
    const double dev = std::abs(implied_e_half(pair, scaled(x, s), scaled(y, s), d_infinity) - 1.0);
    r.deviations.push_back(dev);
    if (dev > 1e-14) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(dev));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    r.fitted_exponent = sxy / sxx;
  } else {
    r.fitted_exponent = std::numeric_limits<double>::infinity();  // identically 1
  }
  return r;
}

/// End of the second deformation: additive BCH and unit density.
inline std::pair<Vector<double>, double> iris_endpoint(const SymmetricPair& pair, const Vector<double>& x,
                                                       const Vector<double>& y) {
  require_in_p(pair, x, "x");
  require_in_p(pair, y, "y");
  return {x + y, 1.0};
}

// ---------------------------------------------------------------------------
// Trace identities for k-valued series F.

/// Lyndon basis elements of even degree <= max_degree, as series of that order.
inline std::vector<LieSeries> even_bracket_words(int max_degree = 4) {
  std::vector<LieSeries> out;
  for (int d = 2; d <= max_degree; d += 2)
    for (const auto& w : lyndon_words(d)) {
      LieSeries s(max_degree);
      s.set(w, 1);
      out.push_back(s);
    }
  return out;
}

struct TraceIdentityReport {
  Rational tr_p_ady_D;   // tr_p(ad y o D_Y F)
  Rational tr_k_D_ady;   // tr_k(D_Y F o ad y)
  Rational tr_p_D_ady;   // tr_p(D_Y F o ad y)
  Rational tr_g_D_ady;   // tr_g(D_Y F o ad y)
  Rational tr_k_commutator;  // tr_k([D_Y F, ad y])
  Rational cyclic_residual, full_trace_residual, k_p_swap_residual;  // signed residuals of the identities
  Rational m_t() const { return Rational(-1, 2) * tr_k_commutator; }
};

inline nlohmann::json to_json(const TraceIdentityReport& r) {
  return {{"tr_p_ady_D", to_string(r.tr_p_ady_D)},   {"tr_k_D_ady", to_string(r.tr_k_D_ady)},
          {"tr_p_D_ady", to_string(r.tr_p_D_ady)},   {"tr_g_D_ady", to_string(r.tr_g_D_ady)},
          {"tr_k_commutator", to_string(r.tr_k_commutator)}, {"cyclic_residual", to_string(r.cyclic_residual)},
          {"full_trace_residual", to_string(r.full_trace_residual)},               {"k_p_swap_residual", to_string(r.k_p_swap_residual)}};
}

/// Exact traces of D_Y F at (x, y) in p x p, where D_Y F is the full
/// Y-differential of F on g x g.
inline TraceIdentityReport trace_identities(const SymmetricPair& pair, const LieSeries& F, const RVector& x,
                                            const RVector& y) {
  require_in_p(pair, x, "x");
  require_in_p(pair, y, "y");
  const auto& g = pair.algebra();
  const auto value = substitute_and_evaluate(F, g, x, y);
  for (int i : pair.p_indices())
    if (!is_zero(value[i])) throw std::invalid_argument("F is not k-valued on p x p");
  const RMatrix D = differential_in_Y(F, g, x, y);
  const RMatrix A = ad(g, y);
  const auto& k = pair.k_indices();
  const auto& p = pair.p_indices();
  const RMatrix AD = A * D, DA = D * A;
  TraceIdentityReport r;
  r.tr_p_ady_D = AD.block(p, p).trace();
  r.tr_k_D_ady = DA.block(k, k).trace();
  r.tr_p_D_ady = DA.block(p, p).trace();
  r.tr_g_D_ady = DA.trace();
  r.tr_k_commutator = (DA - AD).block(k, k).trace();
  r.cyclic_residual = r.tr_p_ady_D - r.tr_k_D_ady;
  r.full_trace_residual = r.tr_g_D_ady - (Rational(2) * r.tr_p_ady_D - r.tr_k_commutator);
  r.k_p_swap_residual = r.tr_k_D_ady - r.tr_p_D_ady;
  return r;
}

/// max |tr_k([D_Y F, ad y])| over random rational points and the given F.
inline Rational rouviere_lemma_check(const SymmetricPair& pair, const std::vector<LieSeries>& fs, int sample_count,
                                     std::uint64_t seed = kDefaultSeed) {
  std::mt19937_64 rng(seed);
  Rational worst(0);
  for (int s = 0; s < sample_count; ++s) {
    const auto x = random_rational_p(pair, rng), y = random_rational_p(pair, rng);
    for (const auto& f : fs) {
      const Rational t = abs(trace_identities(pair, f, x, y).tr_k_commutator);
      if (t > worst) worst = t;
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// First deformation: Z_{sym,tau} and F_tau from Monte-Carlo weights.

/// Scale of the deformation field: the doubled bracket contributes a factor 2.
inline constexpr double kDeformationKappa = 2.0;

/// Monte-Carlo w~_A(tau) with its own stream, cached in `store`.
inline WeightEstimate ftilde_weight(const KGraph& rep, double tau, const SamplerConfig& cfg,
                                    EstimateStore* store = nullptr) {
  std::ostringstream label;
  label.precision(17);
  label << "ftilde@" << tau;
  SamplerConfig c = cfg;
  c.seed = derived_seed(cfg.seed, rep.key() + "|" + label.str());
  auto compute = [&] { return estimate_ftilde(rep, tau, c); };
  if (!store) return compute();
  return store->get_or_compute(rep.key(), {{"site", label.str()}, {"sampler", sampler_json(c)}}, c.seed, compute);
}

/// Lie graphs A with one root feeding F_tau: odd n_A, degree n_A + 1.
inline std::vector<GeometricGraph> ftilde_graphs(int max_degree) {
  std::vector<GeometricGraph> out;
  for (int n = 1; n + 1 <= max_degree && n <= kMaxStarAerial; n += 2)
    for (const auto& gg : geometric_graphs(n, 3, is_lie_simple))
      if (!gg.odd_automorphism) out.push_back(gg);
  return out;
}

/// F_tau = sum_A w~_A(tau) A(X, Y) with doubled-bracket symbols.
inline ExpansionEstimate f_tau(int max_degree, double tau, const SamplerConfig& cfg, EstimateStore* store = nullptr) {
  std::vector<std::pair<WeightEstimate, SymbolPolynomial>> contrib;
  for (const auto& gg : ftilde_graphs(max_degree)) {
    auto sym = expand_symbol(symbol(gg.rep, BracketMode::DoubledGeometric, TerrestrialAssignment::symmetric()));
    for (auto& [k, c] : sym) c *= regroup_factor(gg);
    if (!sym.empty()) contrib.emplace_back(ftilde_weight(gg.rep, tau, cfg, store), sym);
  }
  return aggregate(contrib);
}

struct DeformationSeries {
  int order = 0;
  std::vector<double> taus;
  std::vector<ExpansionEstimate> z;  // Z_{sym,tau}
  std::vector<ExpansionEstimate> f;  // F_tau
};

inline DeformationSeries deformation_series(int order, std::vector<double> taus, const SamplerConfig& cfg,
                                            EstimateStore* store = nullptr) {
  if (order < 1 || order > kMaxStarAerial) throw std::out_of_range("deformation series order must be in [1, 3]");
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (!(taus[i] > taus[i - 1])) throw std::invalid_argument("tau grid must be strictly increasing");
  DeformationSeries d;
  d.order = order;
  d.taus = taus;
  for (double t : taus) {
    d.z.push_back(zsym_expansion(order - 1, WeightSite::deformed(t), cfg, store, true));
    d.f.push_back(f_tau(order, t, cfg, store));
  }
  return d;
}

struct OdeConfig {
  SamplerConfig sampler;
  int order = 3;
  double h = 0.05;
  double tolerance_factor = 5.0;
  double kappa = kDeformationKappa;
  std::optional<int> sign;          // fixed sign of the field; calibrated when absent
  double calibration_tau = 0.35;    // kept off the checked grid
};

struct OdeCoefficient {
  std::string key;
  int degree = 0;
  double lhs = 0, lhs_stderr = 0;  // d/dtau Z_{sym,tau}
  double rhs = 0, rhs_stderr = 0;  // [Y, F_tau] . d_Y Z_{sym,tau}
  double residual = 0, residual_stderr = 0;
  double fd_bound = 0;
  double tolerance = 0;
  bool pass = true;
};

struct OdeReport {
  double tau = 0, h = 0;
  int sign = 1;
  double kappa = kDeformationKappa;
  std::vector<OdeCoefficient> coefficients;
  bool pass() const {
    for (const auto& c : coefficients)
      if (!c.pass) return false;
    return true;
  }
};

inline nlohmann::json to_json(const OdeReport& r) {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : r.coefficients)
    cs.push_back({{"key", c.key},
                  {"degree", c.degree},
                  {"lhs", c.lhs},
                  {"lhs_stderr", c.lhs_stderr},
                  {"rhs", c.rhs},
                  {"rhs_stderr", c.rhs_stderr},
                  {"residual", c.residual},
                  {"residual_stderr", c.residual_stderr},
                  {"fd_bound", c.fd_bound},
                  {"tolerance", c.tolerance},
                  {"pass", c.pass}});
  return {{"tau", r.tau}, {"h", r.h}, {"sign", r.sign}, {"kappa", r.kappa}, {"pass", r.pass()}, {"coefficients", cs}};
}

namespace detail {

using Terms = std::map<std::string, std::vector<std::pair<double, WeightEstimate>>>;

inline int key_degree(const std::string& key) {
  return static_cast<int>(std::count(key.begin(), key.end(), 'X') + std::count(key.begin(), key.end(), 'Y'));
}

/// Central difference of Z_{sym,tau} with step h, shared streams across tau.
inline Terms zsym_derivative_terms(int order, double tau, double h, const SamplerConfig& cfg, EstimateStore* store) {
  Terms out;
  for (int n = 1; n < order; ++n)
    for (const auto& t : graph_terms(n, 3, is_lie_simple, BracketMode::DoubledGeometric,
                                     TerrestrialAssignment::symmetric())) {
      const auto up = mc_weight(t.graph.rep, WeightSite::deformed(tau + h), cfg, store, true);
      const auto down = mc_weight(t.graph.rep, WeightSite::deformed(tau - h), cfg, store, true);
      for (const auto& [k, c] : t.symbol) {
        out[k].emplace_back(to_double(c) / (2 * h), up);
        out[k].emplace_back(-to_double(c) / (2 * h), down);
      }
    }
  return out;
}

/// [Y, F_tau] . d_Y Z at degree <= order. With deg F >= 2 only the linear
/// part Y of Z contributes below degree 4, so this is [Y, F_tau] itself.
inline Terms field_terms(int order, double tau, double scale, const SamplerConfig& cfg, EstimateStore* store) {
  if (order > 3) throw std::out_of_range("the deformation field is assembled to degree 3");
  Terms out;
  for (const auto& gg : ftilde_graphs(order - 1)) {
    const auto s = symbol_lie(gg.rep, BracketMode::DoubledGeometric, TerrestrialAssignment::symmetric());
    const auto br = canonicalize(LieWord::bracket(LieWord::Y(), s.word), order);
    const double c0 = scale * to_double(s.coeff * regroup_factor(gg));
    const auto keys = series_keys(br);
    if (keys.empty()) continue;
    const auto e = ftilde_weight(gg.rep, tau, cfg, store);
    for (const auto& [k, c] : keys) out[k].emplace_back(c0 * to_double(c), e);
  }
  return out;
}

inline std::vector<std::string> zsym_keys(int order) {
  std::vector<std::string> keys;
  for (int d = 1; d <= order; ++d)
    for (const auto& w : lyndon_words(d)) keys.push_back(standard_bracketing(w).to_string());
  return keys;
}

}  // namespace detail

/// Residual of dZ_{sym,tau}/dtau = sign * kappa [Y, F_tau] . d_Y Z_{sym,tau},
/// coefficient by coefficient at degree <= order.
inline OdeReport kv_ode_residual_at(double tau, int sign, const OdeConfig& cfg, EstimateStore* store = nullptr) {
  if (cfg.order < 1 || cfg.order > 3) throw std::out_of_range("ODE residual order must be in [1, 3]");
  if (!(tau - 2 * cfg.h > 0)) throw std::invalid_argument("tau must exceed 2h");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  OdeReport r;
  r.tau = tau;
  r.h = cfg.h;
  r.sign = sign;
  r.kappa = cfg.kappa;
  const auto d1 = detail::zsym_derivative_terms(cfg.order, tau, cfg.h, cfg.sampler, store);
  const auto d2 = detail::zsym_derivative_terms(cfg.order, tau, 2 * cfg.h, cfg.sampler, store);
  const auto field = detail::field_terms(cfg.order, tau, sign * cfg.kappa, cfg.sampler, store);
  auto get = [](const detail::Terms& t, const std::string& k) {
    auto it = t.find(k);
    return it == t.end() ? std::vector<std::pair<double, WeightEstimate>>{} : it->second;
  };
  for (const auto& key : detail::zsym_keys(cfg.order)) {
    OdeCoefficient c;
    c.key = key;
    c.degree = detail::key_degree(key);
    const auto lhs_terms = get(d1, key), rhs_terms = get(field, key);
    const auto lhs = combine(lhs_terms), lhs2 = combine(get(d2, key)), rhs = combine(rhs_terms);
    auto res_terms = lhs_terms;
    for (const auto& [w, e] : rhs_terms) res_terms.emplace_back(-w, e);
    const auto res = combine(res_terms);
    c.lhs = lhs.mean;
    c.lhs_stderr = lhs.std_error;
    c.rhs = rhs.mean;
    c.rhs_stderr = rhs.std_error;
    c.residual = res.mean;
    c.residual_stderr = res.std_error;
    c.fd_bound = std::abs(lhs.mean - lhs2.mean) / 3.0;
    c.tolerance = cfg.tolerance_factor * (c.residual_stderr + c.fd_bound);
    c.pass = std::abs(c.residual) <= c.tolerance + 1e-12;
    r.coefficients.push_back(c);
  }
  return r;
}

/// Picks the sign of the deformation field from the top-degree coefficients
/// at a tau off the checked grid.
inline int calibrate_field_sign(const OdeConfig& cfg, EstimateStore* store = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  int best_sign = 1;
  for (int s : {1, -1}) {
    const auto r = kv_ode_residual_at(cfg.calibration_tau, s, cfg, store);
    double ss = 0;
    for (const auto& c : r.coefficients) ss += c.residual * c.residual;
    if (ss < best) best = ss, best_sign = s;
  }
  return best_sign;
}

inline std::vector<OdeReport> kv_ode_residual(const std::vector<double>& taus, const OdeConfig& cfg,
                                              EstimateStore* store = nullptr) {
  const int sign = cfg.sign ? *cfg.sign : calibrate_field_sign(cfg, store);
  std::vector<OdeReport> out;
  for (double t : taus) out.push_back(kv_ode_residual_at(t, sign, cfg, store));
  return out;
}

struct EndpointCoefficient {
  std::string key;
  double deformed = 0, deformed_stderr = 0;
  double three_point = 0, three_point_stderr = 0;
  double sigma = 0;  // |difference| / combined stderr
  bool pass = true;
};

/// Z_{sym,tau} at small tau against the three-point expansion at s = 1/2.
inline std::vector<EndpointCoefficient> zsym_endpoint(int order, double tau, const SamplerConfig& cfg,
                                                      EstimateStore* store = nullptr, double n_sigma = 3.0) {
  const auto a = zsym_expansion(order - 1, WeightSite::deformed(tau), cfg, store, true);
  const auto b = zsym_from_graphs(order - 1, cfg, store);
  std::vector<EndpointCoefficient> out;
  for (const auto& key : detail::zsym_keys(order)) {
    EndpointCoefficient c;
    c.key = key;
    c.deformed = a.mean(key);
    c.deformed_stderr = a.std_error(key);
    c.three_point = b.mean(key);
    c.three_point_stderr = b.std_error(key);
    const double se = std::hypot(c.deformed_stderr, c.three_point_stderr);
    const double diff = std::abs(c.deformed - c.three_point);
    c.sigma = se > 0 ? diff / se : (diff > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
    c.pass = diff <= n_sigma * se + 1e-12;
    out.push_back(c);
  }
  return out;
}

}  // namespace grexp
