#include "bvy/space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bvy/errors.hpp"
#include "bvy/parallel.hpp"

namespace bvy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kSampleChunk = 4096;

std::uint64_t mix_in(std::uint64_t h, double v) { return splitmix64(h ^ std::bit_cast<std::uint64_t>(v)); }

void check_dim(const Box& window) {
  if (window.lo.size() != window.hi.size() || window.dim() < 1 || window.dim() > kMaxDim)
    throw ConfigError("window must have between 1 and 3 coordinates");
  for (int i = 0; i < window.dim(); ++i)
    if (!(window.hi[i] > window.lo[i])) throw ConfigError("window has an empty side");
}

double sine_weight(double x1) { return 1.0 + 0.5 * std::sin(2.0 * kPi * x1); }

// Integral of cos(2π h_1) over the Euclidean ball of radius r in R^n.
std::optional<double> cosine_ball_integral(int n, double r) {
  const double k = 2.0 * kPi;
  switch (n) {
    case 1:
      return 2.0 * std::sin(k * r) / k;
    case 2:
      return 2.0 * kPi * r * std::cyl_bessel_j(1.0, k * r) / k;
    case 3:
      return 4.0 * kPi * (std::sin(k * r) - k * r * std::cos(k * r)) / (k * k * k);
    default:
      return std::nullopt;
  }
}

std::vector<Interval> build_cantor(double lo, double hi, double ratio, int depth, double& min_gap) {
  std::vector<Interval> current{{lo, hi}};
  min_gap = kInf;
  double scale = 1.0;
  for (int k = 1; k <= depth; ++k) {
    scale *= ratio;
    std::vector<Interval> next;
    next.reserve(current.size() * 2);
    for (const auto& iv : current) {
      const double len = iv.hi - iv.lo;
      const double keep = 0.5 * len * (1.0 - scale);
      next.push_back({iv.lo, iv.lo + keep});
      next.push_back({iv.hi - keep, iv.hi});
      min_gap = std::min(min_gap, len * scale);
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

double Box::volume() const { return (hi - lo).prod(); }

double Box::min_side() const { return (hi - lo).minCoeff(); }

bool Box::contains(const Point& x) const {
  if (x.size() != lo.size()) return false;
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

bool Box::contains(const Box& other) const {
  return other.dim() == dim() && (other.lo.array() >= lo.array()).all() && (other.hi.array() <= hi.array()).all();
}

Box Box::expanded(double r) const { return Box{(lo.array() - r).matrix(), (hi.array() + r).matrix()}; }

Box Box::expanded(const Point& r) const { return Box{lo - r, hi + r}; }

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::EuclideanBox: return "EuclideanBox";
    case SpaceKind::WeightedEuclidean: return "WeightedEuclidean";
    case SpaceKind::BanachBox: return "BanachBox";
    case SpaceKind::Heisenberg1: return "Heisenberg1";
    case SpaceKind::FatCantor: return "FatCantor";
  }
  return "?";
}

SpaceKind space_kind_from_string(std::string_view name) {
  for (auto k : {SpaceKind::EuclideanBox, SpaceKind::WeightedEuclidean, SpaceKind::BanachBox, SpaceKind::Heisenberg1,
                 SpaceKind::FatCantor})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown space kind '" + std::string(name) + "'");
}

std::string_view to_string(WeightId id) { return id == WeightId::Unit ? "unit" : "sine"; }

WeightId weight_id_from_string(std::string_view name) {
  if (name == "unit") return WeightId::Unit;
  if (name == "sine") return WeightId::Sine;
  throw ConfigError("unknown weight '" + std::string(name) + "'");
}

double WeightSpec::operator()(const Point& x) const { return id == WeightId::Unit ? 1.0 : sine_weight(x[0]); }

// ---------------------------------------------------------------------------
// Heisenberg group

namespace heisenberg {

Point mul(const Point& a, const Point& b) {
  Point out(3);
  out[0] = a[0] + b[0];
  out[1] = a[1] + b[1];
  out[2] = a[2] + b[2] + 0.5 * (a[0] * b[1] - a[1] * b[0]);
  return out;
}

Point inv(const Point& a) { return -a; }

Point dilation(const Point& w, double s) {
  Point out(3);
  out[0] = s * w[0];
  out[1] = s * w[1];
  out[2] = s * s * w[2];
  return out;
}

double gauge(const Point& w) {
  const double z2 = w[0] * w[0] + w[1] * w[1];
  return std::sqrt(std::sqrt(z2 * z2 + 16.0 * w[2] * w[2]));
}

double unit_ball_volume() { return kPi * kPi / 8.0; }

}  // namespace heisenberg

double lq_unit_ball_volume(int n, double q) {
  if (std::isinf(q)) return std::pow(2.0, n);
  return std::pow(2.0 * std::tgamma(1.0 + 1.0 / q), n) / std::tgamma(1.0 + n / q);
}

double lq_norm(const Point& v, double q) {
  if (std::isinf(q)) return v.cwiseAbs().maxCoeff();
  if (q == 2.0) return v.norm();
  if (q == 1.0) return v.cwiseAbs().sum();
  return std::pow(v.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

double dual_exponent(double q) {
  if (q == 1.0) return kInf;
  if (std::isinf(q)) return 1.0;
  return q / (q - 1.0);
}

// ---------------------------------------------------------------------------
// SpaceInstance

SpaceInstance::SpaceInstance(SpaceKind kind, Box window) : kind_(kind), window_(std::move(window)) {
  check_dim(window_);
}

void SpaceInstance::finalize_tag() {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(kind_) + 1);
  for (int i = 0; i < window_.dim(); ++i) h = mix_in(mix_in(h, window_.lo[i]), window_.hi[i]);
  h = mix_in(h, q_);
  h = splitmix64(h ^ static_cast<std::uint64_t>(weight_.id));
  h = mix_in(h, cantor_.ratio);
  h = splitmix64(h ^ static_cast<std::uint64_t>(cantor_.depth));
  tag_ = h;
}

SpaceInstance SpaceInstance::euclidean_box(Box window) {
  SpaceInstance s(SpaceKind::EuclideanBox, std::move(window));
  s.finalize_tag();
  return s;
}

SpaceInstance SpaceInstance::weighted_euclidean(Box window, WeightId weight) {
  SpaceInstance s(SpaceKind::WeightedEuclidean, std::move(window));
  s.weight_.id = weight;
  if (weight == WeightId::Sine) {
    s.weight_.a_w = 0.5;
    s.weight_.b_w = 1.5;
  }
  // Dense check of a_w <= w <= b_w along the only coordinate the weight depends on.
  const double lo = s.window_.lo[0];
  const double hi = s.window_.hi[0];
  for (int i = 0; i <= 4096; ++i) {
    Point x = s.window_.lo;
    x[0] = lo + (hi - lo) * i / 4096.0;
    const double w = s.weight_(x);
    if (!(w >= s.weight_.a_w - 1e-15 && w <= s.weight_.b_w + 1e-15 && w > 0.0))
      throw ConfigError("weight violates its declared bounds");
  }
  s.finalize_tag();
  return s;
}

SpaceInstance SpaceInstance::banach_box(Box window, double q) {
  if (!(q >= 1.0)) throw ConfigError("Banach exponent q must lie in [1, inf]");
  SpaceInstance s(SpaceKind::BanachBox, std::move(window));
  s.q_ = q;
  s.finalize_tag();
  return s;
}

SpaceInstance SpaceInstance::heisenberg(Box window) {
  if (window.dim() != 3) throw ConfigError("Heisenberg1 window must be 3-dimensional");
  SpaceInstance s(SpaceKind::Heisenberg1, std::move(window));
  s.finalize_tag();
  return s;
}

SpaceInstance SpaceInstance::fat_cantor(double ratio, int depth, double lo, double hi) {
  if (depth < 1) throw ConfigError("FatCantor depth must be at least 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("FatCantor ratio must lie in (0, 1)");
  SpaceInstance s(SpaceKind::FatCantor, Box{make_point({lo}), make_point({hi})});
  s.cantor_.ratio = ratio;
  s.cantor_.depth = depth;
  s.cantor_.intervals = build_cantor(lo, hi, ratio, depth, s.cantor_.min_gap);
  s.cantor_.piece_length = s.cantor_.intervals.front().hi - s.cantor_.intervals.front().lo;
  s.cantor_.total_length = s.cantor_.piece_length * static_cast<double>(s.cantor_.intervals.size());
  if (!(s.cantor_.total_length > 0.0)) throw ConfigError("FatCantor has no surviving length");
  s.finalize_tag();
  return s;
}

bool SpaceInstance::supports_dilation() const {
  return kind_ == SpaceKind::EuclideanBox || kind_ == SpaceKind::BanachBox || kind_ == SpaceKind::Heisenberg1;
}

double SpaceInstance::dist(const Point& x, const Point& y) const {
  switch (kind_) {
    case SpaceKind::BanachBox: return lq_norm(x - y, q_);
    case SpaceKind::Heisenberg1: return heisenberg::gauge(heisenberg::mul(heisenberg::inv(y), x));
    case SpaceKind::FatCantor: return std::abs(x[0] - y[0]);
    default: return (x - y).norm();
  }
}

double SpaceInstance::gauge(const Point& w) const {
  switch (kind_) {
    case SpaceKind::BanachBox: return lq_norm(w, q_);
    case SpaceKind::Heisenberg1: return heisenberg::gauge(w);
    case SpaceKind::FatCantor: return std::abs(w[0]);
    default: return w.norm();
  }
}

Point SpaceInstance::offset(const Point& x, const Point& y) const {
  if (kind_ == SpaceKind::Heisenberg1) return heisenberg::mul(heisenberg::inv(x), y);
  return y - x;
}

Point SpaceInstance::translate(const Point& x, const Point& w) const {
  if (kind_ == SpaceKind::Heisenberg1) return heisenberg::mul(x, w);
  return x + w;
}

Point SpaceInstance::scale(const Point& w, double s) const {
  if (kind_ == SpaceKind::Heisenberg1) return heisenberg::dilation(w, s);
  return s * w;
}

double SpaceInstance::density(const Point& y) const {
  if (!window_.contains(y)) return 0.0;
  switch (kind_) {
    case SpaceKind::WeightedEuclidean: return weight_(y);
    case SpaceKind::FatCantor: {
      const auto& iv = cantor_.intervals;
      auto it = std::upper_bound(iv.begin(), iv.end(), y[0], [](double v, const Interval& i) { return v < i.lo; });
      if (it == iv.begin()) return 0.0;
      return y[0] <= std::prev(it)->hi ? 1.0 : 0.0;
    }
    default: return 1.0;
  }
}

double SpaceInstance::max_density() const { return kind_ == SpaceKind::WeightedEuclidean ? weight_.b_w : 1.0; }

double SpaceInstance::window_mass() const {
  switch (kind_) {
    case SpaceKind::FatCantor: return cantor_.total_length;
    case SpaceKind::WeightedEuclidean: {
      if (weight_.id == WeightId::Unit) return window_.volume();
      const double a = window_.lo[0];
      const double b = window_.hi[0];
      double rest = 1.0;
      for (int i = 1; i < topo_dim(); ++i) rest *= window_.hi[i] - window_.lo[i];
      return window_.volume() + 0.5 * rest * (std::cos(2.0 * kPi * a) - std::cos(2.0 * kPi * b)) / (2.0 * kPi);
    }
    default: return window_.volume();
  }
}

double SpaceInstance::reference_ball_volume(double r) const {
  switch (kind_) {
    case SpaceKind::Heisenberg1: return heisenberg::unit_ball_volume() * std::pow(r, 4);
    case SpaceKind::BanachBox: return lq_unit_ball_volume(topo_dim(), q_) * std::pow(r, topo_dim());
    case SpaceKind::FatCantor: return 2.0 * r;
    default: return lq_unit_ball_volume(topo_dim(), 2.0) * std::pow(r, topo_dim());
  }
}

Point SpaceInstance::draw_window(Stream& rng) const {
  if (kind_ == SpaceKind::FatCantor) {
    const auto& iv = cantor_.intervals[rng.below(cantor_.intervals.size())];
    return make_point({rng.uniform(iv.lo, iv.hi)});
  }
  const int n = topo_dim();
  Point x(n);
  for (;;) {
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(window_.lo[i], window_.hi[i]);
    if (kind_ != SpaceKind::WeightedEuclidean || weight_.constant()) return x;
    if (rng.uniform() * weight_.b_w < weight_(x)) return x;
  }
}

Point SpaceInstance::draw_ball_proposal(const Point& c, double r, Stream& rng) const {
  const int n = topo_dim();
  if (kind_ == SpaceKind::Heisenberg1) {
    Point v(3);
    do {
      v[0] = rng.uniform(-1.0, 1.0);
      v[1] = rng.uniform(-1.0, 1.0);
      v[2] = rng.uniform(-0.25, 0.25);
    } while (heisenberg::gauge(v) >= 1.0);
    return heisenberg::mul(c, heisenberg::dilation(v, r));
  }
  Point v(n);
  if (n == 1) {
    v[0] = rng.uniform(-1.0, 1.0);
    return c + r * v;
  }
  const double q = kind_ == SpaceKind::BanachBox ? q_ : 2.0;
  if (std::isinf(q)) {
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  } else if (q == 2.0) {
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    v *= std::pow(rng.uniform(), 1.0 / n) / v.norm();
  } else {
    // Barthe-Guédon-Mendelson-Naor: Y / (|Y|_q^q + Z)^{1/q} is uniform in the ℓq ball.
    std::gamma_distribution<double> gamma(1.0 / q, 1.0);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = gamma(rng);
      sum += g;
      v[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(g, 1.0 / q);
    }
    const double z = -std::log(rng.uniform_open0());
    v /= std::pow(sum + z, 1.0 / q);
  }
  return c + r * v;
}

Box SpaceInstance::ball_bbox(const Point& c, double r) const {
  if (kind_ == SpaceKind::Heisenberg1) {
    const double zc = std::hypot(c[0], c[1]);
    return Box{c, c}.expanded(make_point({r, r, 0.25 * r * r + 0.5 * zc * r}));
  }
  return Box{c, c}.expanded(r);
}

bool SpaceInstance::ball_inside_window(const Point& c, double r) const { return window_.contains(ball_bbox(c, r)); }

double SpaceInstance::interval_mass(double a, double b) const {
  a = std::max(a, window_.lo[0]);
  b = std::min(b, window_.hi[0]);
  if (!(b > a)) return 0.0;
  switch (kind_) {
    case SpaceKind::WeightedEuclidean:
      if (weight_.id == WeightId::Unit) return b - a;
      return (b - a) + (std::cos(2.0 * kPi * a) - std::cos(2.0 * kPi * b)) / (4.0 * kPi);
    case SpaceKind::FatCantor: {
      const auto& iv = cantor_.intervals;
      auto first = std::upper_bound(iv.begin(), iv.end(), a, [](double v, const Interval& i) { return v < i.hi; });
      auto last = std::lower_bound(iv.begin(), iv.end(), b, [](const Interval& i, double v) { return i.lo < v; });
      if (first >= last) return 0.0;
      auto overlap = [&](const Interval& i) { return std::max(0.0, std::min(i.hi, b) - std::max(i.lo, a)); };
      const auto count = last - first;
      if (count == 1) return overlap(*first);
      return overlap(*first) + overlap(*std::prev(last)) + static_cast<double>(count - 2) * cantor_.piece_length;
    }
    default: return b - a;
  }
}

std::optional<double> SpaceInstance::exact_ball_mass(const Point& c, double r) const {
  if (kind_ != SpaceKind::Heisenberg1 && topo_dim() == 1) return interval_mass(c[0] - r, c[0] + r);
  if (!ball_inside_window(c, r)) return std::nullopt;
  if (kind_ == SpaceKind::WeightedEuclidean && weight_.id == WeightId::Sine) {
    const auto cos_part = cosine_ball_integral(topo_dim(), r);
    if (!cos_part) return std::nullopt;
    return reference_ball_volume(r) + 0.5 * std::sin(2.0 * kPi * c[0]) * *cos_part;
  }
  return reference_ball_volume(r);
}

// ---------------------------------------------------------------------------
// Free operations

PointRef make_point_ref(const SpaceInstance& space, const Point& coords) {
  if (coords.size() != space.topo_dim()) throw DomainError("point has the wrong number of coordinates");
  if (!space.window().contains(coords)) throw DomainError("point lies outside the window");
  if (space.kind() == SpaceKind::FatCantor && !space.in_support(coords))
    throw DomainError("point lies off the surviving Cantor set");
  return PointRef{coords, space.tag()};
}

double distance(const SpaceInstance& space, const PointRef& x, const PointRef& y) {
  if (x.space_tag != space.tag() || y.space_tag != space.tag()) throw DomainError("points belong to another space");
  return space.dist(x.coords, y.coords);
}

PointSample sample_window(const SpaceInstance& space, std::uint64_t seed, std::size_t n) {
  if (n < 1) throw PreconditionError("sample_window needs n >= 1");
  const std::size_t chunks = chunk_count(n, kSampleChunk);
  auto parts = map_chunks<std::vector<PointRef>>(chunks, [&](std::size_t c) {
    Stream rng(seed, StreamTag::Window, c);
    const std::size_t count = std::min(kSampleChunk, n - c * kSampleChunk);
    std::vector<PointRef> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pts.push_back({space.draw_window(rng), space.tag()});
    return pts;
  });
  PointSample out;
  out.points.reserve(n);
  for (auto& p : parts) out.points.insert(out.points.end(), p.begin(), p.end());
  out.mass = {space.window_mass(), true, 0.0};
  return out;
}

namespace {

struct ProposalStats {
  std::vector<PointRef> accepted;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t proposals = 0;
};

MassValue mc_mass(const SpaceInstance& space, double r, double sum, double sum_sq, std::size_t n) {
  const double vol = space.reference_ball_volume(r);
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
  return {vol * mean, false, vol * std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

PointSample sample_ball(const SpaceInstance& space, const PointRef& center, double r, std::uint64_t seed,
                        std::size_t n) {
  if (!space.supports_ball_sampling())
    throw CapabilityError(std::string(to_string(space.kind())) + " does not support ball sampling");
  if (center.space_tag != space.tag()) throw DomainError("center belongs to another space");
  if (!(r > 0.0)) throw PreconditionError("ball radius must be positive");
  if (n < 1) throw PreconditionError("sample_ball needs n >= 1");
  const double cap = space.max_density();
  const std::size_t chunks = chunk_count(n, kSampleChunk);
  auto parts = map_chunks<ProposalStats>(chunks, [&](std::size_t c) {
    Stream rng(seed, StreamTag::Ball, c);
    const std::size_t want = std::min(kSampleChunk, n - c * kSampleChunk);
    ProposalStats st;
    st.accepted.reserve(want);
    while (st.accepted.size() < want) {
      if (st.proposals > 1000 * want + 100000 && st.accepted.empty())
        throw PreconditionError("ball carries no mass inside the window");
      const Point y = space.draw_ball_proposal(center.coords, r, rng);
      const double d = space.density(y);
      ++st.proposals;
      st.sum += d;
      st.sum_sq += d * d;
      if (d > 0.0 && rng.uniform() * cap < d) st.accepted.push_back({y, space.tag()});
    }
    return st;
  });
  PointSample out;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t proposals = 0;
  for (auto& p : parts) {
    out.points.insert(out.points.end(), p.accepted.begin(), p.accepted.end());
    sum += p.sum;
    sum_sq += p.sum_sq;
    proposals += p.proposals;
  }
  if (auto exact = space.exact_ball_mass(center.coords, r))
    out.mass = {*exact, true, 0.0};
  else
    out.mass = mc_mass(space, r, sum, sum_sq, proposals);
  return out;
}

MassValue ball_measure_mc(const SpaceInstance& space, const Point& center, double r, const McBudget& budget) {
  if (!(r > 0.0)) throw PreconditionError("ball radius must be positive");
  const std::size_t n = std::max<std::size_t>(budget.n, 2);
  const std::size_t chunks = chunk_count(n, kSampleChunk);
  struct Acc {
    double sum = 0.0, sum_sq = 0.0;
  };
  auto parts = map_chunks<Acc>(chunks, [&](std::size_t c) {
    Stream rng(budget.seed, StreamTag::BallMeasure, c);
    const std::size_t count = std::min(kSampleChunk, n - c * kSampleChunk);
    Acc a;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = space.density(space.draw_ball_proposal(center, r, rng));
      a.sum += d;
      a.sum_sq += d * d;
    }
    return a;
  });
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& a : parts) {
    sum += a.sum;
    sum_sq += a.sum_sq;
  }
  return mc_mass(space, r, sum, sum_sq, n);
}

MassValue ball_measure(const SpaceInstance& space, const Point& center, double r, const McBudget& budget) {
  if (!(r > 0.0)) throw PreconditionError("ball radius must be positive");
  if (auto exact = space.exact_ball_mass(center, r)) return {*exact, true, 0.0};
  return ball_measure_mc(space, center, r, budget);
}

MassValue ball_measure(const SpaceInstance& space, const PointRef& center, double r, const McBudget& budget) {
  if (center.space_tag != space.tag()) throw DomainError("center belongs to another space");
  return ball_measure(space, center.coords, r, budget);
}

PointRef dilate(const SpaceInstance& space, const PointRef& base, const PointRef& x, double s) {
  if (!space.supports_dilation())
    throw CapabilityError(std::string(to_string(space.kind())) + " has no dilation structure");
  if (base.space_tag != space.tag() || x.space_tag != space.tag())
    throw DomainError("points belong to another space");
  if (!(s > 0.0)) throw PreconditionError("dilation factor must be positive");
  return {space.translate(base.coords, space.scale(space.offset(base.coords, x.coords), s)), space.tag()};
}

}  // namespace bvy
