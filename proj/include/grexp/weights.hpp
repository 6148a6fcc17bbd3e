#pragma once

#include <grexp/kgraph.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace grexp {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Angle function.

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a, 2 * pi);
  if (a <= -pi) a += 2 * pi;
  if (a > pi) a -= 2 * pi;
  return a;
}

/// Hyperbolic angle at p between the geodesics to infinity and to q, for p, q
/// in the closed upper half-plane. Equal to arg(q - p) + arg(conj(q) - p)
/// wrapped into (-pi, pi]; for real q this is 2 arg(q - p).
inline double angle(Complex p, Complex q) {
  if (std::abs(q - p) == 0.0) throw std::invalid_argument("angle: coincident points");
  if (p.imag() < 0 || q.imag() < 0) throw std::invalid_argument("angle: points must lie in the closed upper half-plane");
  if (p.imag() == 0.0) return 0.0;  // limit as p reaches the real axis
  return wrap_angle(std::arg(q - p) + std::arg(std::conj(q) - p));
}

/// Partial derivatives (d/dp_x, d/dp_y, d/dq_x, d/dq_y) of the angle.
inline std::array<double, 4> angle_gradient(Complex p, Complex q) {
  const Complex a = q - p, b = std::conj(q) - p;
  const double na = std::norm(a), nb = std::norm(b);
  // grad arg(w) = (-Im w, Re w) / |w|^2
  const double ax = -a.imag() / na, ay = a.real() / na;
  const double bx = -b.imag() / nb, by = b.real() / nb;
  return {-ax - bx, -ay - by, ax + bx, ay - by};
}

// ---------------------------------------------------------------------------
// Random streams.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of batch b of a run seeded with `seed`.
inline std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t b) {
  return splitmix64(splitmix64(seed) ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Uniform double in the open interval (0, 1), built from the top 53 bits.
inline double open_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

inline constexpr std::uint64_t kDefaultSeed = 20240611ULL;

/// Default seed, overridable through WEIGHTS_SEED.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("WEIGHTS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("WEIGHTS_SEED must be an unsigned integer");
    }
  }
  return kDefaultSeed;
}

// ---------------------------------------------------------------------------
// Monte-Carlo engine.

struct SamplerConfig {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = kDefaultSeed;
  int batches = 100;
  int threads = 0;  // 0: hardware concurrency
  bool antithetic = true;
  double min_distance = 1e-9;
  double local_fraction = 0.3;  // proposal mass near terrestrial points
  double pair_fraction = 0.3;   // proposal mass near aerial collisions
};

struct WeightEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t rejected = 0;
  std::uint64_t seed = 0;
  std::string graph_id;
  nlohmann::json config;
  std::vector<double> batch_means;  // kept in memory only, for correlated combinations

  double rejection_rate() const { return n_samples ? static_cast<double>(rejected) / n_samples : 0.0; }
};

inline nlohmann::json to_json(const WeightEstimate& e) {
  return {{"graph", e.graph_id}, {"mean", e.mean},         {"stderr", e.std_error}, {"samples", e.n_samples},
          {"rejected", e.rejected}, {"seed", e.seed}, {"config", e.config}};
}

inline WeightEstimate estimate_from_json(const nlohmann::json& j) {
  WeightEstimate e;
  e.graph_id = j.at("graph").get<std::string>();
  e.mean = j.at("mean").get<double>();
  e.std_error = j.at("stderr").get<double>();
  e.n_samples = j.at("samples").get<std::size_t>();
  e.rejected = j.at("rejected").get<std::size_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.config = j.at("config");
  return e;
}

/// Result of one integrand evaluation: value, or nullopt for a rejected sample.
using IntegrandFn = std::function<std::optional<double>(const std::vector<Complex>&)>;

/// Proposal density for k points in the upper half-plane. The base component
/// draws x = center + tan(pi (u - 1/2)), y = v / (1 - v). Two defensive
/// components remove the 1/r singularities of the angle forms from the
/// variance: a 1/r density on small discs around the anchors (terrestrial
/// points and their mirror images), and a 1/r density of one point around
/// another. The full mixture density is evaluated for every sample, and it is
/// symmetric under x -> 2 center - x when the anchors are.
class MixtureProposal {
 public:
  MixtureProposal(int k, double center, std::vector<Complex> anchors, double local_fraction, double pair_fraction)
      : k_(k), center_(center), anchors_(std::move(anchors)) {
    local_ = anchors_.empty() ? 0.0 : local_fraction;
    pair_ = k_ >= 2 ? pair_fraction : 0.0;
    if (local_ < 0 || local_ >= 1 || pair_ < 0 || pair_ >= 1) throw std::invalid_argument("mixture fractions must lie in [0, 1)");
    for (std::size_t j = 0; j < anchors_.size(); ++j) {
      double d = 1.0;
      for (std::size_t i = 0; i < anchors_.size(); ++i)
        if (i != j) d = std::min(d, std::abs(anchors_[i] - anchors_[j]));
      double rho = std::min(0.5, d / 2);
      if (anchors_[j].imag() > 0) rho = std::min(rho, anchors_[j].imag() / 2);
      radii_.push_back(rho);
    }
  }

  template <class Rng>
  void draw(Rng& rng, std::vector<Complex>& z) const {
    int anchor = -1, moved = -1;
    if (pair_ > 0 && open_unit(rng()) < pair_) {
      anchor = static_cast<int>(open_unit(rng()) * k_);
      moved = (anchor + 1 + static_cast<int>(open_unit(rng()) * (k_ - 1))) % k_;
    }
    for (int a = 0; a < k_; ++a)
      if (a != moved) z[a] = draw_single(rng);
    if (moved >= 0) {
      const double rho = pair_radius(z[anchor]);
      z[moved] = z[anchor] + std::polar(rho * open_unit(rng()), 2 * std::numbers::pi * open_unit(rng()));
    }
  }

  double density(const std::vector<Complex>& z) const {
    std::vector<double> p(k_);
    double prod = 1.0;
    for (int a = 0; a < k_; ++a) prod *= (p[a] = single_density(z[a]));
    if (pair_ == 0.0) return prod;
    double pairs = 0.0;
    for (int b = 0; b < k_; ++b) {
      double rest = 1.0;
      for (int c = 0; c < k_; ++c)
        if (c != b) rest *= p[c];
      for (int a = 0; a < k_; ++a)
        if (a != b) pairs += rest * pair_density(z[b], z[a]);
    }
    return (1 - pair_) * prod + pair_ * pairs / (k_ * (k_ - 1));
  }

  nlohmann::json to_json() const {
    return {{"local_fraction", local_}, {"pair_fraction", pair_}, {"center", center_}};
  }

 private:
  static double pair_radius(Complex w) { return std::min(0.25, w.imag() / 2); }

  static double pair_density(Complex z, Complex w) {
    const double rho = pair_radius(w), r = std::abs(z - w);
    return r < rho ? 1.0 / (2 * std::numbers::pi * rho * r) : 0.0;
  }

  double base_density(Complex z) const {
    const double t = z.real() - center_, y = z.imag();
    return 1.0 / (std::numbers::pi * (1 + t * t) * (1 + y) * (1 + y));
  }

  double single_density(Complex z) const {
    double p = (1 - local_) * base_density(z);
    if (local_ > 0) {
      double loc = 0.0;
      for (std::size_t j = 0; j < anchors_.size(); ++j) {
        const double r = std::abs(z - anchors_[j]);
        if (r >= radii_[j]) continue;
        const double area = anchors_[j].imag() > 0 ? 2 * std::numbers::pi : std::numbers::pi;
        loc += 1.0 / (area * radii_[j] * r);
      }
      p += local_ * loc / static_cast<double>(anchors_.size());
    }
    return p;
  }

  template <class Rng>
  Complex draw_single(Rng& rng) const {
    if (local_ > 0 && open_unit(rng()) < local_) {
      const auto j = std::min(anchors_.size() - 1, static_cast<std::size_t>(open_unit(rng()) * anchors_.size()));
      const double r = radii_[j] * open_unit(rng());
      const double span = anchors_[j].imag() > 0 ? 2 * std::numbers::pi : std::numbers::pi;
      return anchors_[j] + std::polar(r, span * open_unit(rng()));
    }
    const double t = std::tan(std::numbers::pi * (open_unit(rng()) - 0.5));
    const double v = open_unit(rng());
    return {center_ + t, v / (1.0 - v)};
  }

  int k_;
  double center_;
  std::vector<Complex> anchors_;
  std::vector<double> radii_;
  double local_ = 0.0, pair_ = 0.0;
};

/// Mirror-closed anchor set: the given points and their images under
/// x -> 2 center - x, without duplicates.
inline std::vector<Complex> mirror_closed(const std::vector<Complex>& pts, double center) {
  std::vector<Complex> out;
  auto add = [&](Complex q) {
    for (const auto& o : out)
      if (std::abs(o - q) < 1e-12) return;
    out.push_back(q);
  };
  for (const auto& q : pts) add(q);
  for (const auto& q : pts) add(Complex(2 * center - q.real(), q.imag()));
  return out;
}

/// Integrates f over (upper half-plane)^k by importance sampling from a
/// MixtureProposal; with `antithetic` set each draw is averaged with its
/// mirror image x -> 2 center - x. Batches are independent streams reduced
/// in order, so the result does not depend on the thread count.
inline WeightEstimate integrate_upper_half_planes(int k, double center, const std::vector<Complex>& anchors,
                                                  const IntegrandFn& f, const SamplerConfig& cfg) {
  if (cfg.samples == 0 || cfg.batches <= 0) throw std::invalid_argument("need positive samples and batches");
  const MixtureProposal proposal(k, center, mirror_closed(anchors, center), cfg.local_fraction, cfg.pair_fraction);
  const int B = cfg.batches;
  std::vector<double> batch_sum(B, 0.0);
  std::vector<std::size_t> batch_n(B, 0), batch_rej(B, 0);

  auto run_batch = [&](int b) {
    std::mt19937_64 rng(batch_seed(cfg.seed, static_cast<std::uint64_t>(b)));
    const std::size_t n = cfg.samples / B + (static_cast<std::size_t>(b) < cfg.samples % B ? 1 : 0);
    std::vector<Complex> z(k), zm(k);
    double sum = 0.0;
    std::size_t rej = 0;
    for (std::size_t i = 0; i < n; ++i) {
      proposal.draw(rng, z);
      const double p = proposal.density(z);
      const auto v1 = f(z);
      double val;
      if (cfg.antithetic) {
        for (int a = 0; a < k; ++a) zm[a] = Complex(2 * center - z[a].real(), z[a].imag());
        const auto v2 = f(zm);
        if (!v1 || !v2) {
          ++rej;
          continue;
        }
        val = 0.5 * (*v1 + *v2);
      } else {
        if (!v1) {
          ++rej;
          continue;
        }
        val = *v1;
      }
      const double contrib = val / p;
      if (!std::isfinite(contrib)) {
        ++rej;
        continue;
      }
      sum += contrib;
    }
    batch_sum[b] = sum;
    batch_n[b] = n;
    batch_rej[b] = rej;
  };

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, B);
  if (threads == 1) {
    for (int b = 0; b < B; ++b) run_batch(b);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int b = t; b < B; b += threads) run_batch(b);
      });
    for (auto& th : pool) th.join();
  }

  WeightEstimate e;
  double total = 0.0;
  std::size_t n = 0;
  for (int b = 0; b < B; ++b) {
    total += batch_sum[b];
    n += batch_n[b];
    e.rejected += batch_rej[b];
  }
  e.n_samples = n;
  e.mean = total / static_cast<double>(n);
  // batch means; batch sizes differ by at most one sample
  double ss = 0.0;
  int used = 0;
  for (int b = 0; b < B; ++b) {
    if (!batch_n[b]) continue;
    const double m = batch_sum[b] / static_cast<double>(batch_n[b]);
    e.batch_means.push_back(m);
    ss += (m - e.mean) * (m - e.mean);
    ++used;
  }
  e.std_error = used > 1 ? std::sqrt(ss / (used - 1) / used) : 0.0;
  e.seed = cfg.seed;
  return e;
}

/// Linear combination sum_i c_i e_i of estimates. When every random term
/// carries batch means of a common batch count the standard error is taken
/// from the combined batch means, which accounts for shared random numbers;
/// otherwise the terms are treated as independent. Terms without batches are
/// exact constants.
inline WeightEstimate combine(const std::vector<std::pair<double, WeightEstimate>>& terms) {
  WeightEstimate out;
  std::size_t nb = 0;
  bool batched = true;
  double var = 0.0;
  for (const auto& [c, e] : terms) {
    out.mean += c * e.mean;
    out.n_samples = std::max(out.n_samples, e.n_samples);
    out.rejected += e.rejected;
    var += c * c * e.std_error * e.std_error;
    if (e.batch_means.empty()) continue;
    if (nb == 0) nb = e.batch_means.size();
    if (e.batch_means.size() != nb) batched = false;
  }
  if (batched && nb > 1) {
    out.batch_means.assign(nb, 0.0);
    for (const auto& [c, e] : terms)
      for (std::size_t b = 0; b < nb; ++b) out.batch_means[b] += c * (e.batch_means.empty() ? e.mean : e.batch_means[b]);
    double m = 0.0, ss = 0.0;
    for (double v : out.batch_means) m += v;
    m /= static_cast<double>(nb);
    for (double v : out.batch_means) ss += (v - m) * (v - m);
    out.std_error = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
  } else {
    out.std_error = std::sqrt(var);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph integrands.

/// Positions of the terrestrial (fixed) points, in the order -1, -2, ...
struct FixedPoints {
  std::vector<Complex> points;
  double center() const { return 0.5 * (points.front().real() + points.back().real()); }
};

namespace detail {

inline bool too_close(const std::vector<Complex>& z, const std::vector<Complex>& fixed, double eps) {
  for (std::size_t a = 0; a < z.size(); ++a) {
    for (std::size_t b = a + 1; b < z.size(); ++b)
      if (std::abs(z[a] - z[b]) < eps) return true;
    for (const auto& q : fixed)
      if (std::abs(z[a] - q) < eps) return true;
  }
  return false;
}

inline Complex target_position(int t, const std::vector<Complex>& z, const FixedPoints& fp) {
  return t >= 0 ? z[t] : fp.points[KGraph::terrestrial_index(t)];
}

/// Adds the gradient of edge (v -> t) to row `row` of the Jacobian over the
/// aerial coordinates (x_0, y_0, x_1, y_1, ...).
template <class M>
void add_edge_row(M& jac, int row, int v, int t, const std::vector<Complex>& z, const FixedPoints& fp) {
  const auto g = angle_gradient(z[v], target_position(t, z, fp));
  jac(row, 2 * v) += g[0];
  jac(row, 2 * v + 1) += g[1];
  if (t >= 0) {
    jac(row, 2 * t) += g[2];
    jac(row, 2 * t + 1) += g[3];
  }
}

}  // namespace detail

/// det d(phi_e)_e / d(x_0, y_0, ..., x_{n-1}, y_{n-1}) at aerial positions z,
/// i.e. the form /\_e dphi_e on the standard coordinate frame.
inline double weight_integrand(const KGraph& g, const FixedPoints& fp, const std::vector<Complex>& z) {
  const int d = 2 * g.n;
  if (d == 0) return 1.0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8> jac(d, d);
  jac.setZero();
  for (int v = 0; v < g.n; ++v)
    for (int s = 0; s < 2; ++s) detail::add_edge_row(jac, 2 * v + s, v, g.targets[v][s], z, fp);
  return jac.determinant();
}

inline void check_weight_graph(const KGraph& g, const FixedPoints& fp) {
  if (!is_admissible(g)) throw std::invalid_argument("weight of an inadmissible graph");
  if (g.n > 3) throw std::out_of_range("weights are capped at n <= 3 aerial vertices");
  if (static_cast<int>(fp.points.size()) != g.m) throw std::invalid_argument("one fixed point per terrestrial vertex");
}

inline nlohmann::json sampler_json(const SamplerConfig& cfg) {
  return {{"samples", cfg.samples},           {"batches", cfg.batches},
          {"antithetic", cfg.antithetic},     {"min_distance", cfg.min_distance},
          {"local_fraction", cfg.local_fraction}, {"pair_fraction", cfg.pair_fraction}};
}

/// (2 pi)^{-2n} times the integral of /\ dphi_e over the aerial positions,
/// terrestrial points held at `fp`.
inline WeightEstimate estimate_weight_at(const KGraph& g, const FixedPoints& fp, const SamplerConfig& cfg,
                                         const std::string& kind, nlohmann::json params) {
  check_weight_graph(g, fp);
  WeightEstimate e;
  if (g.n == 0) {
    e.mean = 1.0;
    e.n_samples = cfg.samples;
    e.seed = cfg.seed;
  } else {
    const double norm = std::pow(2 * std::numbers::pi, -2.0 * g.n);
    const double eps = cfg.min_distance;
    e = integrate_upper_half_planes(
        g.n, fp.center(), fp.points,
        [&](const std::vector<Complex>& z) -> std::optional<double> {
          if (detail::too_close(z, fp.points, eps)) return std::nullopt;
          return norm * weight_integrand(g, fp, z);
        },
        cfg);
  }
  e.graph_id = g.key();
  params["kind"] = kind;
  params["sampler"] = sampler_json(cfg);
  e.config = params;
  return e;
}

/// w_Gamma with terrestrial points at 0 and 1.
inline WeightEstimate estimate_weight(const KGraph& g, const SamplerConfig& cfg) {
  if (g.m != 2) throw std::invalid_argument("estimate_weight needs m = 2");
  return estimate_weight_at(g, {{0.0, 1.0}}, cfg, "w", nlohmann::json::object());
}

/// w_Gamma(s) with terrestrial points at 0, s, 1.
inline WeightEstimate estimate_weight_3pt(const KGraph& g, double s, const SamplerConfig& cfg) {
  if (g.m != 3) throw std::invalid_argument("estimate_weight_3pt needs m = 3");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0, 1)");
  return estimate_weight_at(g, {{0.0, s, 1.0}}, cfg, "w3", {{"s", s}});
}

/// w_Gamma(tau): middle point lifted to 1/2 + i tau.
inline WeightEstimate estimate_weight_deformed(const KGraph& g, double tau, const SamplerConfig& cfg) {
  if (g.m != 3) throw std::invalid_argument("estimate_weight_deformed needs m = 3");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  return estimate_weight_at(g, {{0.0, Complex(0.5, tau), 1.0}}, cfg, "wdef", {{"tau", tau}});
}

/// Integrand of the d tau coefficient: A's edges plus the edge from the moving
/// point t = 1/2 + i tau to A's root, as a (2n+1)-form in (x_0, y_0, ..., tau)
/// evaluated on (d/dx_0, d/dy_0, ..., d/dtau).
inline double ftilde_integrand(const KGraph& a, int root, double tau, const std::vector<Complex>& z) {
  const int d = 2 * a.n + 1;
  const FixedPoints fp{{0.0, Complex(0.5, tau), 1.0}};
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8> jac(d, d);
  jac.setZero();
  for (int v = 0; v < a.n; ++v)
    for (int s = 0; s < 2; ++s) {
      const int row = 2 * v + s;
      const int t = a.targets[v][s];
      detail::add_edge_row(jac, row, v, t, z, fp);
      if (t == KGraph::terrestrial(1)) jac(row, d - 1) += angle_gradient(z[v], fp.points[1])[3];
    }
  const auto g = angle_gradient(fp.points[1], z[root]);
  jac(d - 1, 2 * root) += g[2];
  jac(d - 1, 2 * root + 1) += g[3];
  jac(d - 1, d - 1) += g[1];
  return jac.determinant();
}

/// w~_A(tau) for a Lie-type simple graph A with an odd number of aerial
/// vertices, terrestrial points (0, t, 1).
inline WeightEstimate estimate_ftilde(const KGraph& a, double tau, const SamplerConfig& cfg) {
  if (a.m != 3) throw std::invalid_argument("estimate_ftilde needs m = 3");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (a.n > 3) throw std::out_of_range("w~ is capped at n <= 3");
  if (classify(a).kind != GraphKind::LieSimple) throw std::invalid_argument("w~ needs a Lie-type simple graph");
  if (a.n % 2 == 0) throw std::invalid_argument("w~ needs an odd number of aerial vertices");
  const auto deg = aerial_in_degrees(a);
  const int root = static_cast<int>(std::find(deg.begin(), deg.end(), 0) - deg.begin());
  const double norm = std::pow(2 * std::numbers::pi, -(2.0 * a.n + 1));
  const std::vector<Complex> fixed{0.0, Complex(0.5, tau), 1.0};
  const double eps = cfg.min_distance;
  auto e = integrate_upper_half_planes(
      a.n, 0.5, fixed,
      [&](const std::vector<Complex>& z) -> std::optional<double> {
        if (detail::too_close(z, fixed, eps)) return std::nullopt;
        return norm * ftilde_integrand(a, root, tau, z);
      },
      cfg);
  e.graph_id = a.key();
  e.config = {{"kind", "ftilde"}, {"tau", tau}, {"sampler", sampler_json(cfg)}};
  return e;
}

/// Seed derived from a base seed and a label, so that distinct estimates use
/// independent streams.
inline std::uint64_t derived_seed(std::uint64_t base, const std::string& label) {
  return splitmix64(base ^ fnv1a(label));
}

// ---------------------------------------------------------------------------
// Append-only JSON-lines estimate cache keyed by graph and configuration.

class EstimateStore {
 public:
  EstimateStore() = default;
  explicit EstimateStore(std::string path) : path_(std::move(path)) { load(); }

  static std::string key(const std::string& graph_id, const nlohmann::json& config, std::uint64_t seed) {
    return graph_id + "|" + hex64(fnv1a(config.dump())) + "|" + std::to_string(seed);
  }

  std::optional<WeightEstimate> find(const std::string& k) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const WeightEstimate& e) { put(key(e.graph_id, e.config, e.seed), e); }

  void put(const std::string& k, const WeightEstimate& e) {
    std::lock_guard<std::mutex> lock(mu_);
    if (entries_.count(k)) return;
    entries_.emplace(k, e);
    if (!path_.empty()) {
      auto j = to_json(e);
      j["key"] = k;
      std::ofstream out(path_, std::ios::app);
      out << j.dump() << "\n";
    }
  }

  /// Returns the cached estimate or computes and records it.
  WeightEstimate get_or_compute(const std::string& graph_id, const nlohmann::json& config, std::uint64_t seed,
                                const std::function<WeightEstimate()>& compute) {
    const auto k = key(graph_id, config, seed);
    if (auto hit = find(k)) return *hit;
    auto e = compute();
    put(k, e);
    return e;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  void load() {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const auto e = estimate_from_json(j);
        entries_.emplace(j.contains("key") ? j["key"].get<std::string>() : key(e.graph_id, e.config, e.seed), e);
      } catch (const std::exception&) {
        // a torn trailing line from an interrupted run is skipped
      }
    }
  }

  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, WeightEstimate> entries_;
};

}  // namespace grexp
