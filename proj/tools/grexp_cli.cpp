#include <grexp/algebra_io.hpp>
#include <grexp/checks.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace grexp;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
  int order = 2;
  double samples = 2e5;
  std::optional<std::uint64_t> seed;
  std::optional<double> s;
  std::vector<double> taus;
  std::vector<std::string> pairs;
  int degree = 4;
  std::string mode = "calibrated";
  std::string out;
  int threads = 0;
  std::string cache;
  int n = 1, m = 2;
  int points = 100;
  std::string target;  // positional: file, graph key or graph JSON
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t seed_of(const Options& o) { return o.seed ? *o.seed : default_seed(); }

SamplerConfig sampler_of(const Options& o) {
  if (!(o.samples >= 1) || o.samples > 1e10 || o.samples != std::floor(o.samples))
    throw UsageError("--samples must be a positive integer");
  SamplerConfig c;
  c.samples = static_cast<std::size_t>(o.samples);
  c.seed = seed_of(o);
  c.threads = o.threads;
  return c;
}

json expansion_json(const ExpansionEstimate& e) {
  json rows = json::array();
  for (const auto& [k, w] : e.terms) rows.push_back({{"key", k}, {"mean", w.mean}, {"stderr", w.std_error}});
  return rows;
}

template <class T>
json series_json(const std::map<std::string, T>& s) {
  json rows = json::object();
  for (const auto& [k, c] : s) rows[k] = to_string(c);
  return rows;
}

KGraph parse_graph(const std::string& text) {
  if (text.empty()) throw UsageError("a graph key, JSON object or JSON file is required");
  if (text.front() == '{') return graph_from_json(json::parse(text));
  if (text.rfind("n", 0) == 0 && text.find(':') != std::string::npos) return graph_from_key(text);
  std::ifstream in(text);
  if (!in) throw UsageError("cannot read graph " + text);
  return graph_from_json(json::parse(in));
}

json graph_info(const KGraph& g) {
  const auto c = classify(g);
  json comps = json::array();
  for (auto k : c.components) comps.push_back(to_string(k));
  const auto cf = canonical_form(g);
  return {{"key", g.key()},      {"graph", to_json(g)},           {"kind", to_string(c.kind)},
          {"components", comps}, {"canonical", cf.rep.key()},      {"sign", cf.sign},
          {"odd_automorphism", cf.odd_automorphism}};
}

/// A subcommand produces a result and a pass flag; the config records every
/// parameter that influences the result.
struct Outcome {
  CheckResult result;
  json config;
};

using Handler = std::function<Outcome(const Options&, EstimateStore*)>;

Outcome algebra_validate(const Options& o, EstimateStore*) {
  const auto pair = load_pair(o.target);
  const auto violations = validate(pair);
  CheckResult r;
  r.pass = violations.empty();
  json v = json::array();
  for (const auto& x : violations) v.push_back(to_json(x));
  r.report = {{"name", pair.key()}, {"dim", pair.dim()}, {"solvable", is_solvable(pair.algebra())}, {"violations", v}};
  return {r, {{"file", o.target}}};
}

Outcome algebra_catalog(const Options&, EstimateStore*) {
  CheckResult r;
  r.report = json::array();
  for (const auto& e : catalog())
    r.report.push_back({{"key", e.key()},
                        {"dim", e.pair.dim()},
                        {"dim_k", e.pair.k_indices().size()},
                        {"dim_p", e.pair.p_indices().size()},
                        {"solvable", e.solvable},
                        {"very_symmetric", e.very_symmetric()},
                        {"description", e.description}});
  return {r, json::object()};
}

Outcome algebra_show(const Options& o, EstimateStore*) {
  const auto e = resolve_entry(o.target);
  CheckResult r;
  r.report = to_json(e.pair);
  r.report["solvable"] = e.solvable;
  r.report["very_symmetric"] = e.very_symmetric();
  r.report["k_indices"] = e.pair.k_indices();
  r.report["p_indices"] = e.pair.p_indices();
  r.pass = validate(e.pair).empty();
  return {r, {{"pair", o.target}}};
}

Outcome graphs_enumerate(const Options& o, EstimateStore*) {
  CheckResult r;
  json graphs = json::array();
  for (const auto& g : enumerate_admissible(o.n, o.m)) graphs.push_back({{"key", g.key()}, {"kind", to_string(classify(g).kind)}});
  r.report = {{"n", o.n}, {"m", o.m}, {"count", graphs.size()}, {"graphs", graphs}};
  return {r, {{"n", o.n}, {"m", o.m}}};
}

Outcome graphs_classify(const Options& o, EstimateStore*) {
  const auto g = parse_graph(o.target);
  CheckResult r;
  r.report = graph_info(g);
  return {r, {{"graph", g.key()}}};
}

Outcome weights_estimate(const Options& o, EstimateStore* store) {
  const auto g = parse_graph(o.target);
  const auto cfg = sampler_of(o);
  WeightSite site = WeightSite::two_point();
  if (!o.taus.empty()) {
    if (o.taus.size() != 1) throw UsageError("weights estimate takes a single --tau");
    site = WeightSite::deformed(o.taus.front());
  } else if (g.m == 3) {
    site = WeightSite::three_point(o.s.value_or(0.5));
  }
  if (g.m != 2 && site.kind == WeightSite::Kind::TwoPoint) throw UsageError("only m = 2 or m = 3 graphs have weights");
  if (g.m != 3 && site.kind != WeightSite::Kind::TwoPoint) throw UsageError("--s and --tau need m = 3");
  // labeled graphs are estimated directly, not through their representative
  SamplerConfig c = cfg;
  c.seed = derived_seed(cfg.seed, g.key() + "|" + site.label());
  auto compute = [&] {
    switch (site.kind) {
      case WeightSite::Kind::ThreePoint: return estimate_weight_3pt(g, site.param, c);
      case WeightSite::Kind::Deformed: return estimate_weight_deformed(g, site.param, c);
      default: return estimate_weight(g, c);
    }
  };
  const auto e = store ? store->get_or_compute(g.key(), {{"site", site.label()}, {"sampler", sampler_json(c)}}, c.seed, compute)
                       : compute();
  CheckResult r;
  r.report = to_json(e);
  return {r, {{"graph", g.key()}, {"site", site.label()}, {"samples", c.samples}}};
}

Outcome weights_table(const Options& o, EstimateStore* store) {
  CheckResult r;
  json rows = json::array();
  if (o.mode == "calibrated") {
    for (const auto& [k, w] : CalibratedWeights::instance().table()) rows.push_back({{"graph", k}, {"weight", to_string(w)}});
    r.report = {{"mode", o.mode}, {"weights", rows}};
    return {r, {{"mode", o.mode}}};
  }
  const auto cfg = sampler_of(o);
  for (int n = 1; n <= o.order; ++n)
    for (const auto& gg : geometric_graphs(n, 2, is_relevant)) {
      if (gg.odd_automorphism) continue;
      const auto e = mc_weight(gg.rep, WeightSite::two_point(), cfg, store);
      json row = {{"graph", gg.rep.key()}, {"mean", e.mean}, {"stderr", e.std_error}};
      if (auto w = CalibratedWeights::instance().geometric_weight(gg.rep)) row["calibrated"] = to_string(*w);
      rows.push_back(row);
    }
  r.report = {{"mode", o.mode}, {"order", o.order}, {"weights", rows}};
  return {r, {{"mode", o.mode}, {"order", o.order}, {"samples", cfg.samples}}};
}

Outcome weights_symmetries(const Options& o, EstimateStore* store) {
  const auto cfg = sampler_of(o);
  return {check_weight_symmetries(o.order, cfg, store), {{"max_n", o.order}, {"samples", cfg.samples}}};
}

Outcome weights_s_independence(const Options& o, EstimateStore* store) {
  const auto cfg = sampler_of(o);
  std::vector<double> ss = {0.25, 0.5, 0.75};
  if (o.s) ss = {0.5, *o.s};
  return {check_s_independence(o.order, ss, cfg, store), {{"order", o.order}, {"s", ss}, {"samples", cfg.samples}}};
}

Outcome bch_compute(const Options& o, EstimateStore* store) {
  CheckResult r;
  if (o.mode == "calibrated") {
    r.report = {{"mode", o.mode}, {"order", o.order}, {"series", series_json(series_keys(bch_from_graphs_calibrated(o.order)))}};
    return {r, {{"mode", o.mode}, {"order", o.order}}};
  }
  const auto cfg = sampler_of(o);
  r.report = {{"mode", o.mode}, {"order", o.order}, {"series", expansion_json(bch_from_graphs_mc(o.order, cfg, store))}};
  return {r, {{"mode", o.mode}, {"order", o.order}, {"samples", cfg.samples}}};
}

Outcome bch_compare(const Options& o, EstimateStore* store) {
  if (o.mode == "calibrated") return {check_bch_calibrated(o.order), {{"mode", o.mode}, {"order", o.order}}};
  const auto cfg = sampler_of(o);
  return {check_bch_mc(o.order, cfg, store), {{"mode", o.mode}, {"order", o.order}, {"samples", cfg.samples}}};
}

Outcome zsym_compute(const Options& o, EstimateStore* store) {
  CheckResult r;
  if (o.mode == "calibrated") {
    r.report = {{"order", o.order}, {"series", series_json(series_keys(zsym_reference(o.order)))}};
    return {r, {{"mode", o.mode}, {"order", o.order}}};
  }
  const auto cfg = sampler_of(o);
  r.report = {{"order", o.order}, {"series", expansion_json(zsym_from_graphs(o.order - 1, cfg, store))}};
  return {r, {{"mode", o.mode}, {"order", o.order}, {"samples", cfg.samples}}};
}

Outcome zsym_verify(const Options& o, EstimateStore* store) {
  const auto cfg = sampler_of(o);
  const auto graphs = check_zsym_graphs(o.order, cfg, store);
  const auto dual = check_zsym_dual(o.points, 0.05, 3, cfg.seed);
  CheckResult r;
  r.pass = graphs.pass && dual.pass;
  r.report = {{"graphs", graphs.report}, {"dual_oracle", dual.report}};
  return {r, {{"order", o.order}, {"samples", cfg.samples}, {"points", o.points}}};
}

Outcome density_verify(const Options& o, EstimateStore*) {
  const auto seed = seed_of(o);
  return {check_density(resolve_entries(o.pairs), o.points, 0.08, seed),
          {{"pairs", o.pairs}, {"points", o.points}}};
}

Outcome lemma_check(const Options& o, EstimateStore*) {
  const auto seed = seed_of(o);
  return {check_traces(resolve_entries(o.pairs), o.points, seed), {{"pairs", o.pairs}, {"points", o.points}}};
}

Outcome ode_residual(const Options& o, EstimateStore* store) {
  OdeConfig c;
  c.sampler = sampler_of(o);
  c.order = o.order;
  const auto taus = o.taus.empty() ? std::vector<double>{0.2, 0.5, 1.0} : o.taus;
  return {check_ode(taus, c, store), {{"order", c.order}, {"tau", taus}, {"samples", c.sampler.samples}}};
}

Outcome transport_check(const Options& o, EstimateStore*) {
  std::vector<CatalogEntry> entries;
  if (o.pairs.empty()) {
    for (const auto& e : catalog())
      if (e.solvable || e.very_symmetric()) entries.push_back(e);
  } else {
    entries = resolve_entries(o.pairs);
  }
  return {check_transport(entries, o.degree), {{"pairs", o.pairs}, {"degree", o.degree}}};
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw UsageError("cannot write " + out);
  f << j.dump(2) << "\n";
}

int fail_usage(const std::string& kind, const std::string& message) {
  std::cout << json{{"error", kind}, {"message", message}, {"version", artifact_version()}}.dump(2) << "\n";
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph expansions, symmetric BCH and transport checks for symmetric pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", artifact_version());
  Options o;
  Handler handler;
  std::string command;

  auto common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "base seed (default: WEIGHTS_SEED or built-in)");
    c->add_option("--out", o.out, "write the report to a file");
    c->add_option("--threads", o.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    c->add_option("--cache", o.cache, "JSON-lines estimate cache");
  };
  auto sampling = [&](CLI::App* c) {
    c->add_option("--samples", o.samples, "Monte-Carlo samples per weight")->capture_default_str();
    c->add_option("--order", o.order, "order")->capture_default_str()->check(CLI::Range(1, 3));
  };
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, Handler h) {
    auto* c = parent->add_subcommand(name, help);
    common(c);
    c->callback([&, h, name, parent] {
      handler = h;
      command = parent->get_name() + " " + name;
    });
    return c;
  };

  auto* algebra = app.add_subcommand("algebra", "Lie algebras and symmetric pairs")->require_subcommand(1);
  leaf(algebra, "validate", "validate an algebra file", algebra_validate)->add_option("file", o.target)->required();
  leaf(algebra, "catalog", "list the built-in pairs", algebra_catalog);
  leaf(algebra, "show", "print a pair by key or file", algebra_show)->add_option("pair", o.target)->required();

  auto* graphs = app.add_subcommand("graphs", "admissible graphs")->require_subcommand(1);
  auto* en = leaf(graphs, "enumerate", "enumerate admissible graphs", graphs_enumerate);
  en->add_option("--n", o.n, "aerial vertices")->check(CLI::Range(0, kMaxAerial));
  en->add_option("--m", o.m, "terrestrial vertices")->check(CLI::Range(0, 4));
  leaf(graphs, "classify", "classify a graph (key, JSON or file)", graphs_classify)->add_option("graph", o.target)->required();

  auto* weights = app.add_subcommand("weights", "graph weights")->require_subcommand(1);
  auto* we = leaf(weights, "estimate", "Monte-Carlo weight of a labeled graph", weights_estimate);
  we->add_option("graph", o.target)->required();
  we->add_option("--s", o.s, "middle point for m = 3")->check(CLI::Range(0.0, 1.0));
  we->add_option("--tau", o.taus, "deformation parameter");
  sampling(we);
  auto* wt = leaf(weights, "table", "weights of geometric graphs", weights_table);
  wt->add_option("--mode", o.mode)->check(CLI::IsMember({"calibrated", "monte-carlo"}));
  sampling(wt);
  sampling(leaf(weights, "symmetries", "edge-swap and mirror symmetries", weights_symmetries));
  auto* si = leaf(weights, "s-independence", "triple-product contributions across s", weights_s_independence);
  sampling(si);
  si->add_option("--s", o.s, "compare this s against 1/2")->check(CLI::Range(0.0, 1.0));

  auto* bch = app.add_subcommand("bch", "BCH series from graphs")->require_subcommand(1);
  for (auto [name, h] : {std::pair{"compute", Handler(bch_compute)}, std::pair{"compare", Handler(bch_compare)}}) {
    auto* c = leaf(bch, name, std::string(name) + " the graph BCH series", h);
    sampling(c);
    c->add_option("--mode", o.mode)->check(CLI::IsMember({"calibrated", "monte-carlo"}));
  }

  auto* zsym = app.add_subcommand("zsym", "symmetric BCH")->require_subcommand(1);
  auto* zc = leaf(zsym, "compute", "reference (calibrated) or graph (monte-carlo) series", zsym_compute);
  zc->add_option("--order", o.order)->check(CLI::Range(1, kMaxFreeDegree));
  zc->add_option("--samples", o.samples);
  zc->add_option("--mode", o.mode)->check(CLI::IsMember({"calibrated", "monte-carlo"}));
  auto* zv = leaf(zsym, "verify", "graphs against the reference and the matrix oracle", zsym_verify);
  zv->add_option("--order", o.order)->check(CLI::Range(2, kMaxStarAerial + 1));
  zv->add_option("--samples", o.samples);
  zv->add_option("--points", o.points)->check(CLI::PositiveNumber);

  auto* density = app.add_subcommand("density", "density identities")->require_subcommand(1);
  auto* dv = leaf(density, "verify", "two forms of the density, doubled Jacobian", density_verify);
  dv->add_option("--pair", o.pairs, "catalog key or algebra file (repeatable)");
  dv->add_option("--points", o.points)->check(CLI::PositiveNumber);

  auto* lemma = app.add_subcommand("lemma", "trace identities")->require_subcommand(1);
  auto* lc = leaf(lemma, "check", "trace identities and the commutator lemma", lemma_check);
  lc->add_option("--pair", o.pairs, "catalog key or algebra file (repeatable)");
  lc->add_option("--points", o.points)->check(CLI::PositiveNumber);

  auto* ode = app.add_subcommand("ode", "deformation ODE")->require_subcommand(1);
  auto* orr = leaf(ode, "residual", "residual of the deformation ODE", ode_residual);
  orr->add_option("--tau", o.taus, "deformation parameters (repeatable)");
  orr->add_option("--samples", o.samples);
  orr->add_option("--order", o.order)->check(CLI::Range(1, 3));

  auto* transport = app.add_subcommand("transport", "symmetrization with J^(1/2)")->require_subcommand(1);
  auto* tc = leaf(transport, "check", "homomorphism on invariants", transport_check);
  tc->add_option("--pair", o.pairs, "catalog key or algebra file (repeatable)");
  tc->add_option("--degree", o.degree)->check(CLI::Range(0, 6));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_usage("usage", e.what());
  }

  try {
    std::optional<EstimateStore> store;
    if (!o.cache.empty()) store.emplace(o.cache);
    const auto outcome = handler(o, store ? &*store : nullptr);
    emit(envelope(command, outcome.config, seed_of(o), outcome.result), o.out);
    return outcome.result.pass ? kExitPass : kExitFail;
  } catch (const FormatError& e) {
    return fail_usage("format", e.what());
  } catch (const UsageError& e) {
    return fail_usage("usage", e.what());
  } catch (const json::exception& e) {
    return fail_usage("format", e.what());
  } catch (const std::invalid_argument& e) {
    return fail_usage("invalid-argument", e.what());
  } catch (const std::out_of_range& e) {
    return fail_usage("out-of-range", e.what());
  } catch (const std::domain_error& e) {
    return fail_usage("domain", e.what());
  }
}
