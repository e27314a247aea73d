#include "gerbelab/cover.hpp"

#include <bit>
#include <set>
#include <stdexcept>
#include <string>

namespace gerbelab {

namespace {

int mod(int a, int n) {
  int r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

BoxChart::BoxChart(const CubicalTorusComplex& X, const Box& box) : X_(&X), box_(box), d_(X.dimension()) {
  nv_ = 1;
  for (int a = 0; a < d_; ++a) {
    if (box.length[a] < 0 || box.length[a] >= X.resolution()) throw std::invalid_argument("box length out of range");
    extent_[a] = box.length[a] + 1;
    nv_ *= extent_[a];
  }
}

int BoxChart::slots(int k) const {
  if (k < 0 || k > d_) return 0;
  return int(X_->orientations(k).size()) * nv_;
}

std::array<int, 3> BoxChart::offset(int slot) const {
  int lin = slot % nv_;
  std::array<int, 3> o{0, 0, 0};
  for (int a = d_ - 1; a >= 0; --a) {
    o[a] = lin % extent_[a];
    lin /= extent_[a];
  }
  return o;
}

AxisMask BoxChart::axes(int k, int slot) const { return X_->orientations(k)[slot / nv_]; }

int BoxChart::slot(AxisMask s, std::array<int, 3> o) const {
  int lin = 0;
  for (int a = 0; a < d_; ++a) lin = lin * extent_[a] + o[a];
  return X_->orientation_index(s) * nv_ + lin;
}

bool BoxChart::valid(int k, int slot) const {
  const AxisMask s = axes(k, slot);
  const auto o = offset(slot);
  for (int a = 0; a < d_; ++a)
    if ((s & (1u << a)) && o[a] >= box_.length[a]) return false;
  return true;
}

int BoxChart::local(const Cell& c) const {
  std::array<int, 3> o{0, 0, 0};
  const int N = X_->resolution();
  for (int a = 0; a < d_; ++a) {
    o[a] = mod(c.base[a] - box_.start[a], N);
    const bool along = c.axes & (1u << a);
    if (along ? o[a] >= box_.length[a] : o[a] > box_.length[a]) return -1;
  }
  return slot(c.axes, o);
}

int BoxChart::global_vertex(std::array<int, 3> o) const {
  std::array<int, 3> x{0, 0, 0};
  for (int a = 0; a < d_; ++a) x[a] = box_.start[a] + o[a];
  return X_->vertex_linear(x);
}

int BoxChart::global(int k, int slot) const {
  const auto o = offset(slot);
  std::array<int, 3> x{0, 0, 0};
  for (int a = 0; a < d_; ++a) x[a] = box_.start[a] + o[a];
  (void)k;
  return X_->cell_index(axes(k, slot), x);
}

Eigen::VectorXd BoxChart::restrict(int k, const Eigen::VectorXd& g) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(slots(k));
  for (int s = 0; s < slots(k); ++s)
    if (valid(k, s)) out(s) = g(global(k, s));
  return out;
}

void BoxChart::scatter_add(int k, const Eigen::VectorXd& local, Eigen::VectorXd& g) const {
  for (int s = 0; s < slots(k); ++s)
    if (valid(k, s)) g(global(k, s)) += local(s);
}

Eigen::VectorXd BoxChart::coboundary(int k, const Eigen::VectorXd& c) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(slots(k + 1));
  if (k >= d_) return Eigen::VectorXd();
  for (int s = 0; s < slots(k + 1); ++s) {
    if (!valid(k + 1, s)) continue;
    const AxisMask S = axes(k + 1, s);
    const auto o = offset(s);
    double acc = 0;
    int i = 0;
    for (int a = 0; a < d_; ++a) {
      if (!(S & (1u << a))) continue;
      const AxisMask face = S & ~(1u << a);
      auto up = o;
      up[a] += 1;
      const double sgn = (i % 2 == 0) ? 1 : -1;
      acc += sgn * (c(slot(face, up)) - c(slot(face, o)));
      ++i;
    }
    out(s) = acc;
  }
  return out;
}

std::array<int, 3> BoxChart::root(RootRule rule) const {
  std::array<int, 3> r{0, 0, 0};
  if (rule == RootRule::Highest)
    for (int a = 0; a < d_; ++a) r[a] = box_.length[a];
  return r;
}

Eigen::VectorXd BoxChart::homotopy(int k, const Eigen::VectorXd& c, RootRule rule) const {
  if (k <= 0) return Eigen::VectorXd();
  const auto r = root(rule);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(slots(k - 1));
  for (int s = 0; s < slots(k - 1); ++s) {
    if (!valid(k - 1, s)) continue;
    const AxisMask S = axes(k - 1, s);
    const auto o = offset(s);
    double acc = 0;
    for (int t = 0; t < d_; ++t) {
      if (S & ((1u << (t + 1)) - 1)) break;  // some axis <= t lies in S
      auto q = o;
      for (int a = 0; a < t; ++a) q[a] = r[a];
      const AxisMask St = S | (1u << t);
      if (rule == RootRule::Lowest) {
        for (int i = 0; i < o[t]; ++i) {
          q[t] = i;
          acc += c(slot(St, q));
        }
      } else {
        for (int i = o[t]; i < box_.length[t]; ++i) {
          q[t] = i;
          acc -= c(slot(St, q));
        }
      }
    }
    out(s) = acc;
  }
  return out;
}

bool verify_contraction(const BoxChart& chart, RootRule rule) {
  const int d = chart.dimension();
  const int rootslot = chart.slot(0, chart.root(rule));
  for (int k = 0; k <= d; ++k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(chart.slots(k));
    for (int s = 0; s < chart.slots(k); ++s)
      if (chart.valid(k, s)) c(s) = double((s * 7919 + 13 * k) % 23) - 11.0;
    Eigen::VectorXd lhs = Eigen::VectorXd::Zero(chart.slots(k));
    if (k > 0) lhs += chart.coboundary(k - 1, chart.homotopy(k, c, rule));
    if (k < d) lhs += chart.homotopy(k + 1, chart.coboundary(k, c), rule);
    Eigen::VectorXd rhs = c;
    if (k == 0)
      for (int s = 0; s < chart.slots(0); ++s) rhs(s) -= c(rootslot);
    for (int s = 0; s < chart.slots(k); ++s)
      if (chart.valid(k, s) && lhs(s) != rhs(s)) return false;
  }
  return true;
}

int Nerve::index(const Simplex& s) const {
  const int k = int(s.size()) - 1;
  if (k < 0 || k > max_dimension()) return -1;
  auto it = lookup_[k].find(s);
  return it == lookup_[k].end() ? -1 : it->second;
}

GoodCover::GoodCover(std::shared_ptr<const CubicalTorusComplex> complex) : complex_(std::move(complex)) {
  const auto& X = *complex_;
  const int d = X.dimension(), N = X.resolution();
  if (N < 3) throw std::invalid_argument("good cover needs N >= 3, got " + std::to_string(N));
  cuts_ = {0, N / 3, (2 * N) / 3, N};

  int nsets = 1;
  for (int a = 0; a < d; ++a) nsets *= 3;
  for (int alpha = 0; alpha < nsets; ++alpha) {
    Box b;
    int rem = alpha;
    for (int a = d - 1; a >= 0; --a) {
      const int j = rem % 3;
      rem /= 3;
      b.start[a] = cuts_[j];
      b.length[a] = cuts_[j + 1] - cuts_[j];
    }
    sets_.push_back(b);
  }

  // Intersection box of a family of sets, or nullopt when empty.
  auto meet = [&](const Nerve::Simplex& s) -> std::optional<Box> {
    Box b;
    for (int a = 0; a < d; ++a) {
      std::set<int> used;
      for (int alpha : s) used.insert(arcs(alpha)[a]);
      if (used.size() == 3) return std::nullopt;
      if (used.size() == 1) {
        const int j = *used.begin();
        b.start[a] = cuts_[j];
        b.length[a] = cuts_[j + 1] - cuts_[j];
      } else {
        const int j0 = *used.begin(), j1 = *used.rbegin();
        // Arcs j and j+1 share cut j+1; arcs 0 and 2 share cut 0.
        const int shared = (j1 == j0 + 1) ? j0 + 1 : 0;
        b.start[a] = mod(cuts_[shared], N);
        b.length[a] = 0;
      }
    }
    return b;
  };

  nerve_.simplices_.assign(kNerveDimension + 1, {});
  nerve_.lookup_.assign(kNerveDimension + 1, {});
  boxes_.assign(kNerveDimension + 1, {});
  for (int alpha = 0; alpha < nsets; ++alpha) {
    nerve_.simplices_[0].push_back({alpha});
    boxes_[0].push_back(sets_[alpha]);
  }
  for (int k = 1; k <= kNerveDimension; ++k)
    for (const auto& s : nerve_.simplices_[k - 1])
      for (int beta = s.back() + 1; beta < nsets; ++beta) {
        auto t = s;
        t.push_back(beta);
        if (auto b = meet(t)) {
          nerve_.simplices_[k].push_back(t);
          boxes_[k].push_back(*b);
        }
      }
  for (int k = 0; k <= kNerveDimension; ++k)
    for (int i = 0; i < int(nerve_.simplices_[k].size()); ++i) nerve_.lookup_[k][nerve_.simplices_[k][i]] = i;

  nerve_.coboundary_.resize(kNerveDimension);
  for (int k = 0; k < kNerveDimension; ++k) {
    std::vector<Eigen::Triplet<std::int64_t>> trip;
    for (int r = 0; r < nerve_.count(k + 1); ++r) {
      const auto& s = nerve_.simplices_[k + 1][r];
      for (int i = 0; i <= k + 1; ++i) {
        auto f = s;
        f.erase(f.begin() + i);
        trip.emplace_back(r, nerve_.lookup_[k].at(f), i % 2 ? -1 : 1);
      }
    }
    IntSparse D(nerve_.count(k + 1), nerve_.count(k));
    D.setFromTriplets(trip.begin(), trip.end());
    nerve_.coboundary_[k] = D;
  }

  charts_.resize(kNerveDimension + 1);
  certified_.resize(kNerveDimension + 1);
  for (int k = 0; k <= kNerveDimension; ++k)
    for (const auto& b : boxes_[k]) {
      charts_[k].emplace_back(X, b);
      certified_[k].push_back(verify_contraction(charts_[k].back(), RootRule::Lowest) &&
                              verify_contraction(charts_[k].back(), RootRule::Highest));
    }

  membership_.assign(d + 1, {});
  for (int k = 0; k <= d; ++k) {
    membership_[k].assign(X.cell_count(k), 0);
    for (int c = 0; c < X.cell_count(k); ++c) {
      const Cell cl = X.cell(k, c);
      for (int alpha = 0; alpha < nsets; ++alpha)
        if (charts_[0][alpha].local(cl) >= 0) membership_[k][c] |= (1u << alpha);
    }
  }

  cohomology_.resize(4);
  for (int k = 1; k <= 3 && k < kNerveDimension; ++k)
    cohomology_[k].emplace(nerve_.coboundary(k - 1), nerve_.coboundary(k), k);
  IntSparse d3t = IntSparse(nerve_.coboundary(2).transpose());
  IntSparse d2t = IntSparse(nerve_.coboundary(1).transpose());
  homology2_ = IntegerCohomology(d3t, d2t, 2).group();
}

std::array<int, 3> GoodCover::arcs(int alpha) const {
  const int d = complex_->dimension();
  std::array<int, 3> j{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    j[a] = alpha % 3;
    alpha /= 3;
  }
  return j;
}

bool GoodCover::all_certified() const {
  for (const auto& v : certified_)
    for (bool b : v)
      if (!b) return false;
  return true;
}

int GoodCover::hub(int k, int cell) const {
  const std::uint32_t m = membership(k, cell);
  if (m == 0) throw std::logic_error("cell not covered");
  return std::countr_zero(m);
}

const IntegerCohomology& GoodCover::nerve_cohomology(int k) const {
  if (k < 1 || k > 3 || !cohomology_[k]) throw std::out_of_range("nerve cohomology degree out of range");
  return *cohomology_[k];
}

GoodCover good_cover_torus(std::shared_ptr<const CubicalTorusComplex> X) { return GoodCover(std::move(X)); }

GoodCover good_cover_torus(const CubicalTorusComplex& X) {
  return GoodCover(std::make_shared<const CubicalTorusComplex>(X));
}

}  // namespace gerbelab
