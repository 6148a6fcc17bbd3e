#pragma once

#include <grexp/algebra_io.hpp>
#include <grexp/catalog.hpp>
#include <grexp/free_lie.hpp>
#include <grexp/kgraph.hpp>
#include <grexp/pbw_transport.hpp>
#include <grexp/star_engine.hpp>
#include <grexp/symspace.hpp>
#include <grexp/weights.hpp>

#include <json.hpp>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace grexp {

#ifndef GREXP_VERSION
#define GREXP_VERSION "0.1.0"
#endif

inline const char* artifact_version() { return GREXP_VERSION; }

/// Catalog entry for a key, or an entry wrapping an algebra file. File pairs
/// carry no very-symmetric structure.
inline CatalogEntry resolve_entry(const std::string& key_or_path) {
  for (const auto& e : catalog())
    if (e.key() == key_or_path) return e;
  auto pair = load_pair(key_or_path);
  const bool solvable = is_solvable(pair.algebra());
  return CatalogEntry{std::move(pair), std::nullopt, solvable, "loaded from " + key_or_path};
}

inline std::vector<CatalogEntry> resolve_entries(const std::vector<std::string>& keys) {
  if (keys.empty()) return catalog();
  std::vector<CatalogEntry> out;
  for (const auto& k : keys) out.push_back(resolve_entry(k));
  return out;
}

/// Outcome of one verification pipeline.
struct CheckResult {
  bool pass = true;
  nlohmann::json report;
};

/// Report envelope: version, seed and a hash of the configuration.
inline nlohmann::json envelope(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                               const CheckResult& r) {
  return {{"command", command},
          {"version", artifact_version()},
          {"seed", seed},
          {"config", config},
          {"config_hash", hex64(fnv1a(config.dump()))},
          {"pass", r.pass},
          {"result", r.report}};
}

namespace detail {

inline nlohmann::json estimate_row(const std::string& key, double mean, double se, double expected, bool pass) {
  return {{"key", key}, {"estimate", mean}, {"stderr", se}, {"expected", expected},
          {"sigma", se > 0 ? std::abs(mean - expected) / se : 0.0}, {"pass", pass}};
}

/// Every key of the estimate and of the reference, within n_sigma.
template <class Ref>
CheckResult compare_expansion(const ExpansionEstimate& est, const Ref& ref, double n_sigma) {
  CheckResult r;
  r.report = nlohmann::json::array();
  std::map<std::string, double> expected;
  for (const auto& [k, c] : ref) expected[k] = to_double(c);
  for (const auto& k : est.keys()) expected.emplace(k, 0.0);
  for (const auto& [k, e] : expected) {
    const double m = est.mean(k), se = est.std_error(k);
    const bool ok = std::abs(m - e) <= n_sigma * se + 1e-12;
    r.pass = r.pass && ok;
    r.report.push_back(estimate_row(k, m, se, e, ok));
  }
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BCH from graphs.

/// Calibrated: exact comparison with the Dynkin series of degree N + 1.
inline CheckResult check_bch_calibrated(int N) {
  CheckResult r;
  const auto graphs = series_keys(bch_from_graphs_calibrated(N));
  const auto ref = series_keys(bch_dynkin(N + 1));
  nlohmann::json rows = nlohmann::json::array();
  std::map<std::string, bool> keys;
  for (const auto& [k, c] : ref) keys[k] = true;
  for (const auto& [k, c] : graphs) keys[k] = true;
  for (const auto& [k, unused] : keys) {
    const Rational a = graphs.count(k) ? graphs.at(k) : Rational(0), b = ref.count(k) ? ref.at(k) : Rational(0);
    r.pass = r.pass && a == b;
    rows.push_back({{"key", k}, {"graphs", to_string(a)}, {"dynkin", to_string(b)}, {"exact", a == b}});
  }
  r.report = {{"mode", "calibrated"}, {"order", N}, {"coefficients", rows}};
  return r;
}

/// Monte Carlo: every coefficient within n_sigma of Dynkin.
inline CheckResult check_bch_mc(int N, const SamplerConfig& cfg, EstimateStore* store = nullptr,
                                double n_sigma = 3.0) {
  const auto est = bch_from_graphs_mc(N, cfg, store);
  auto r = detail::compare_expansion(est, series_keys(bch_dynkin(N + 1)), n_sigma);
  double max_se = 0;
  for (const auto& k : est.keys()) max_se = std::max(max_se, est.std_error(k));
  r.report = {{"mode", "monte-carlo"}, {"order", N}, {"samples", cfg.samples}, {"max_stderr", max_se},
              {"coefficients", r.report}};
  return r;
}

// ---------------------------------------------------------------------------
// Symmetric BCH.

/// Graph expansion at s = 1/2 against the reference series, degree <= order.
inline CheckResult check_zsym_graphs(int order, const SamplerConfig& cfg, EstimateStore* store = nullptr,
                                     double n_sigma = 3.0) {
  const auto est = zsym_from_graphs(order - 1, cfg, store);
  auto r = detail::compare_expansion(est, series_keys(zsym_reference(order)), n_sigma);
  r.report = {{"order", order}, {"samples", cfg.samples}, {"coefficients", r.report}};
  return r;
}

/// Series against matrix oracle on sl2 x sl2 / diag, and exact p-valuedness of
/// the series on every catalog pair.
inline CheckResult check_zsym_dual(int points = 100, double radius = 0.05, int exact_points = 3,
                                   std::uint64_t seed = kDefaultSeed, double tol = 1e-8) {
  CheckResult r;
  const auto& pair = catalog_entry("sl2xsl2").pair;
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int i = 0; i < points; ++i) {
    const auto x = random_p(pair, rng, radius), y = random_p(pair, rng, radius);
    const auto a = zsym_series_value(pair, x, y, 8), b = zsym_matrix_oracle(pair, x, y);
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
  }
  r.pass = worst <= tol;
  const auto series = zsym_reference(8);
  nlohmann::json kproj = nlohmann::json::object();
  for (const auto& e : catalog()) {
    bool zero = true;
    for (int i = 0; i < exact_points; ++i) {
      const auto x = random_rational_p(e.pair, rng, 2, 2), y = random_rational_p(e.pair, rng, 2, 2);
      const auto z = substitute_and_evaluate(series, e.pair.algebra(), x, y);
      for (int k : e.pair.k_indices()) zero = zero && is_zero(z[k]);
    }
    kproj[e.key()] = zero;
    r.pass = r.pass && zero;
  }
  r.report = {{"pair", pair.key()}, {"points", points}, {"radius", radius}, {"max_abs_difference", worst},
              {"tolerance", tol}, {"k_projection_exactly_zero", kproj}};
  return r;
}

// ---------------------------------------------------------------------------
// Density identities.

inline CheckResult check_density(const std::vector<CatalogEntry>& pairs, int points = 100, double radius = 0.08,
                                 std::uint64_t seed = kDefaultSeed, double tol_forms = 1e-8,
                                 double tol_doubled = 1e-10) {
  CheckResult r;
  r.report = nlohmann::json::array();
  for (const auto& entry : pairs) {
    const auto& pair = entry.pair;
    const auto& key = entry.key();
    std::mt19937_64 rng(seed);
    double forms = 0, dbl = 0, kproj = 0;
    for (int i = 0; i < points; ++i) {
      const auto x = random_p(pair, rng, radius), y = random_p(pair, rng, radius);
      const auto d = dsym(pair, x, y);
      forms = std::max(forms, d.residual);
      kproj = std::max(kproj, d.z_k_projection);
      const double J = J_function(pair, x);
      dbl = std::max(dbl, std::abs(j_doubled(pair, x) - J * J));
    }
    const bool ok = forms <= tol_forms && dbl <= tol_doubled;
    r.pass = r.pass && ok;
    r.report.push_back({{"pair", key}, {"points", points}, {"max_form_residual", forms},
                        {"max_doubled_residual", dbl}, {"max_z_k_projection", kproj}, {"pass", ok}});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Weight symmetries.

/// Edge-swap antisymmetry for every admissible graph with 1 <= n <= max_n and
/// m in {2, 3}, and the mirror rule at s = 1/2 for m = 3. Each labeled graph
/// gets an independent stream.
inline CheckResult check_weight_symmetries(int max_n, const SamplerConfig& cfg, EstimateStore* store = nullptr,
                                           double n_sigma = 3.0) {
  CheckResult r;
  std::map<std::string, WeightEstimate> cache;
  auto weight = [&](const KGraph& g) -> const WeightEstimate& {
    auto it = cache.find(g.key());
    if (it != cache.end()) return it->second;
    SamplerConfig c = cfg;
    c.seed = derived_seed(cfg.seed, "labeled|" + g.key());
    auto compute = [&] { return g.m == 2 ? estimate_weight(g, c) : estimate_weight_3pt(g, 0.5, c); };
    auto e = store ? store->get_or_compute(g.key(), {{"site", g.m == 2 ? "w" : "w3@0.5"}, {"sampler", sampler_json(c)}},
                                           c.seed, compute)
                   : compute();
    return cache.emplace(g.key(), e).first->second;
  };
  int swaps = 0, mirrors = 0;
  double worst = 0;
  nlohmann::json failures = nlohmann::json::array();
  auto test = [&](const std::string& kind, const KGraph& a, const KGraph& b, double factor) {
    const auto& wa = weight(a);
    const auto& wb = weight(b);
    const double se = std::hypot(wa.std_error, factor * wb.std_error);
    const double diff = std::abs(wa.mean - factor * wb.mean);
    const double z = se > 0 ? diff / se : (diff > 1e-12 ? 1e300 : 0.0);
    worst = std::max(worst, z);
    if (diff > n_sigma * se + 1e-12) {
      r.pass = false;
      failures.push_back({{"kind", kind}, {"graph", a.key()}, {"partner", b.key()}, {"w", wa.mean},
                          {"w_partner", wb.mean}, {"sigma", z}});
    }
  };
  for (int m : {2, 3})
    for (int n = 1; n <= max_n; ++n)
      for (const auto& g : enumerate_admissible(n, m)) {
        std::vector<bool> flip(n, false);
        flip[0] = true;
        const auto s = swap_edges(g, flip);
        if (g.key() < s.key()) {
          test("swap", g, s, -1.0);
          ++swaps;
        }
        if (m == 3) {
          const auto mg = mirror(g);
          if (g.key() <= mg.key()) {
            test("mirror", g, mg, n % 2 ? -1.0 : 1.0);
            ++mirrors;
          }
        }
      }
  // the wedge
  SamplerConfig wc = cfg;
  wc.samples = std::max<std::size_t>(cfg.samples, 1'000'000);
  wc.seed = derived_seed(cfg.seed, "wedge");
  const auto wedge = estimate_weight(KGraph{1, 2, {{{-1, -2}}}}, wc);
  const bool wedge_ok = std::abs(wedge.mean - 0.5) <= n_sigma * wedge.std_error && wedge.std_error <= 2e-3;
  r.pass = r.pass && wedge_ok;
  r.report = {{"swap_pairs", swaps},
              {"mirror_pairs", mirrors},
              {"labeled_graphs", cache.size()},
              {"max_sigma", worst},
              {"failures", failures},
              {"wedge", {{"mean", wedge.mean}, {"stderr", wedge.std_error}, {"samples", wc.samples}, {"pass", wedge_ok}}}};
  return r;
}

// ---------------------------------------------------------------------------
// Independence of the middle point.

/// Differences of the aggregated order <= N triple-product contributions
/// between every pair of s values, with shared streams across s.
inline CheckResult check_s_independence(int N, const std::vector<double>& ss, const SamplerConfig& cfg,
                                        EstimateStore* store = nullptr, double n_sigma = 3.0) {
  CheckResult r;
  std::vector<std::map<std::string, std::vector<std::pair<double, WeightEstimate>>>> at(ss.size());
  for (int n = 1; n <= N; ++n)
    for (const auto& t : graph_terms(n, 3, is_relevant, BracketMode::DoubledGeometric, TerrestrialAssignment::symmetric()))
      for (std::size_t i = 0; i < ss.size(); ++i) {
        const auto e = mc_weight(t.graph.rep, WeightSite::three_point(ss[i]), cfg, store, true);
        for (const auto& [k, c] : t.symbol) at[i][k].emplace_back(to_double(c), e);
      }
  nlohmann::json values = nlohmann::json::object(), diffs = nlohmann::json::array();
  for (std::size_t i = 0; i < ss.size(); ++i)
    for (const auto& [k, terms] : at[i]) {
      const auto e = combine(terms);
      values[k].push_back({{"s", ss[i]}, {"mean", e.mean}, {"stderr", e.std_error}});
    }
  for (std::size_t i = 0; i < ss.size(); ++i)
    for (std::size_t j = i + 1; j < ss.size(); ++j)
      for (const auto& [k, terms] : at[i]) {
        auto d = terms;
        for (const auto& [c, e] : at[j].at(k)) d.emplace_back(-c, e);
        const auto e = combine(d);
        const bool ok = std::abs(e.mean) <= n_sigma * e.std_error + 1e-12;
        r.pass = r.pass && ok;
        diffs.push_back({{"key", k}, {"s1", ss[i]}, {"s2", ss[j]}, {"difference", e.mean}, {"stderr", e.std_error},
                         {"pass", ok}});
      }
  r.report = {{"order", N}, {"samples", cfg.samples}, {"values", values}, {"differences", diffs}};
  return r;
}

// ---------------------------------------------------------------------------
// Trace identities and the lemma.

inline CheckResult check_traces(const std::vector<CatalogEntry>& pairs, int points = 100,
                                std::uint64_t seed = kDefaultSeed) {
  CheckResult r;
  r.report = nlohmann::json::array();
  const auto words = even_bracket_words(4);
  for (const auto& e : pairs) {
    const auto& key = e.key();
    std::mt19937_64 rng(seed);
    bool cyclic = true, full_trace = true, swap = true, lemma = true;
    Rational worst_commutator(0), worst_swap(0);
    for (int i = 0; i < points; ++i) {
      const auto x = random_rational_p(e.pair, rng), y = random_rational_p(e.pair, rng);
      for (const auto& f : words) {
        const auto t = trace_identities(e.pair, f, x, y);
        cyclic = cyclic && is_zero(t.cyclic_residual);
        full_trace = full_trace && is_zero(t.full_trace_residual);
        swap = swap && is_zero(t.k_p_swap_residual);
        lemma = lemma && is_zero(t.tr_k_commutator);
        worst_commutator = std::max(worst_commutator, Rational(abs(t.tr_k_commutator)));
        worst_swap = std::max(worst_swap, Rational(abs(t.k_p_swap_residual)));
      }
    }
    const bool lemma_applies = e.solvable || e.very_symmetric();
    const bool ok = cyclic && full_trace && (!lemma_applies || lemma) && (!e.very_symmetric() || swap);
    r.pass = r.pass && ok;
    r.report.push_back({{"pair", key},
                        {"points", points},
                        {"words", words.size()},
                        {"cyclic_exact", cyclic},
                        {"full_trace_exact", full_trace},
                        {"k_p_swap_exact", swap},
                        {"k_p_swap_required", e.very_symmetric()},
                        {"lemma_exact", lemma},
                        {"lemma_required", lemma_applies},
                        {"max_tr_k_commutator", to_string(worst_commutator)},
                        {"max_m_t", to_string(Rational(worst_commutator / 2))},
                        {"max_k_p_swap", to_string(worst_swap)},
                        {"pass", ok}});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Deformation ODE.

inline CheckResult check_ode(const std::vector<double>& taus, const OdeConfig& cfg, EstimateStore* store = nullptr,
                             double endpoint_tau = 1e-3) {
  CheckResult r;
  OdeConfig c = cfg;
  if (!c.sign) c.sign = calibrate_field_sign(c, store);
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& rep : kv_ode_residual(taus, c, store)) {
    r.pass = r.pass && rep.pass();
    reports.push_back(to_json(rep));
  }
  nlohmann::json endpoint = nlohmann::json::array();
  for (const auto& e : zsym_endpoint(c.order, endpoint_tau, c.sampler, store)) {
    r.pass = r.pass && e.pass;
    endpoint.push_back({{"key", e.key}, {"deformed", e.deformed}, {"deformed_stderr", e.deformed_stderr},
                        {"three_point", e.three_point}, {"three_point_stderr", e.three_point_stderr},
                        {"sigma", e.sigma}, {"pass", e.pass}});
  }
  r.report = {{"order", c.order},       {"h", c.h},         {"kappa", c.kappa},
              {"sign", *c.sign},        {"calibration_tau", c.calibration_tau},
              {"samples", c.sampler.samples}, {"residuals", reports},
              {"endpoint_tau", endpoint_tau}, {"endpoint", endpoint}};
  return r;
}

// ---------------------------------------------------------------------------
// Transport.

inline CheckResult check_transport(const std::vector<CatalogEntry>& pairs, int D) {
  CheckResult r;
  r.report = nlohmann::json::array();
  for (const auto& e : pairs) {
    const auto rep = check_homomorphism(e.pair, D);
    r.pass = r.pass && rep.exact();
    r.report.push_back(to_json(rep));
  }
  return r;
}

}  // namespace grexp
