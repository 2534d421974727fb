#include "wsvm/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "wsvm/parallel_kernels.hpp"

namespace wsvm {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

enum : std::uint8_t { cand_none, cand_m_to_o, cand_m_to_i, cand_o_to_m, cand_i_to_m };

EventKind kind_of(std::uint8_t c) {
  switch (c) {
    case cand_m_to_o: return EventKind::m_to_o;
    case cand_m_to_i: return EventKind::m_to_i;
    case cand_o_to_m: return EventKind::o_to_m;
    case cand_i_to_m: return EventKind::i_to_m;
    default: return EventKind::completion;
  }
}

// Start of a path from all-zero weights (bias problems). At θ = 0 every
// variable sits on both bounds, so the sets for θ → 0⁺ come from the rates:
// b solves the limiting LP max pᵀr, yᵀr = 0, 0 ≤ r ≤ d, and the variables
// tied at that b share the drift through min ½ rᵀQr over their boxes.
void zero_weight_start(const DualProblem& prob, std::span<const double> d, SolutionState& st) {
  const std::size_t n = prob.size();
  st.alpha.assign(n, 0.0);
  st.sets.assign(n, SetKind::O);
  std::vector<double> t(n);
  std::vector<std::size_t> live;
  for (std::size_t v = 0; v < n; ++v) {
    t[v] = prob.y(v) * prob.p(v);
    if (d[v] > 0.0) live.push_back(v);
  }
  if (live.empty()) {
    st.b = prob.default_bias();
    refresh_margins(prob, st);
    return;
  }
  // F(b) = Σ_{y=+1, t>b} d − Σ_{y=−1, t<b} d is nonincreasing in b.
  std::vector<double> knots;
  for (std::size_t v : live) knots.push_back(t[v]);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  auto F = [&](double b, int side) {  // side −1: F(b⁻), +1: F(b⁺)
    double f = 0.0;
    for (std::size_t v : live) {
      const bool pos = prob.y(v) > 0;
      if (t[v] == b) {
        if (pos == (side < 0)) f += pos ? d[v] : -d[v];
      } else if (pos ? t[v] > b : t[v] < b) {
        f += pos ? d[v] : -d[v];
      }
    }
    return f;
  };
  double b0 = knots.front() - 1.0;
  bool tied = false;
  if (F(knots.front(), -1) > 0.0) {
    b0 = knots.back() + 1.0;
    for (std::size_t k = 0; k < knots.size(); ++k) {
      if (F(knots[k], +1) < 0.0) {
        b0 = knots[k];
        tied = true;
        break;
      }
      if (F(knots[k], +1) == 0.0) {
        b0 = k + 1 < knots.size() ? 0.5 * (knots[k] + knots[k + 1]) : knots[k] + 1.0;
        break;
      }
    }
  }
  st.b = b0;

  std::vector<std::size_t> tie;
  std::vector<double> r(n, 0.0);
  double need = 0.0;  // Σ_tie y r must equal this
  for (std::size_t v : live) {
    const double gap = prob.p(v) - prob.y(v) * b0;
    if (tied && t[v] == b0) {
      tie.push_back(v);
    } else if (gap > 0.0) {
      st.sets[v] = SetKind::I;
      r[v] = d[v];
      need -= prob.y(v) * d[v];
    }
  }
  if (!tie.empty()) {
    // Feasible fill, then pairwise SMO on the tied block.
    double rest = need;
    for (std::size_t v : tie) {
      if (rest == 0.0) break;
      if ((prob.y(v) > 0) != (rest > 0)) continue;
      const double x = std::min(d[v], std::abs(rest));
      r[v] = x;
      rest -= prob.y(v) * x;
    }
    const std::size_t k = tie.size();
    std::vector<double> a(k * k), g(k, 0.0);
    std::vector<double> u(prob.items(), 0.0), scratch;
    for (std::size_t v = 0; v < n; ++v)
      if (r[v] != 0.0 && st.sets[v] == SetKind::I) prob.add_item_row(v, r[v], u);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) a[i * k + j] = a[j * k + i] = prob.q(tie[i], tie[j]);
      g[i] = prob.terms().gather(tie[i], u);
    }
    std::vector<double> grad(g);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) grad[i] += a[i * k + j] * r[tie[j]];
    const double tol = 1e-13;
    for (std::size_t it = 0; it < 100000 + 100 * k; ++it) {
      std::ptrdiff_t iu = -1, il = -1;
      double gu = -inf, gl = inf;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t v = tie[i];
        const double y = prob.y(v), x = -y * grad[i];
        const bool can_up = y > 0 ? r[v] < d[v] : r[v] > 0.0;
        const bool can_down = y > 0 ? r[v] > 0.0 : r[v] < d[v];
        if (can_up && x > gu) { gu = x; iu = static_cast<std::ptrdiff_t>(i); }
        if (can_down && x < gl) { gl = x; il = static_cast<std::ptrdiff_t>(i); }
      }
      if (iu < 0 || il < 0 || gu - gl <= tol) break;
      const auto i = static_cast<std::size_t>(iu), j = static_cast<std::size_t>(il);
      const std::size_t vi = tie[i], vj = tie[j];
      const double yi = prob.y(vi), yj = prob.y(vj);
      const double curv =
          std::max(a[i * k + i] + a[j * k + j] - 2.0 * yi * yj * a[i * k + j], 1e-15);
      double step = (gu - gl) / curv;
      // r_i += y_i step, r_j −= y_j step
      step = std::min(step, yi > 0 ? d[vi] - r[vi] : r[vi]);
      step = std::min(step, yj > 0 ? r[vj] : d[vj] - r[vj]);
      if (!(step > 0.0)) break;
      const double di = yi * step, dj = -yj * step;
      r[vi] = std::clamp(r[vi] + di, 0.0, d[vi]);
      r[vj] = std::clamp(r[vj] + dj, 0.0, d[vj]);
      for (std::size_t q = 0; q < k; ++q) grad[q] += a[q * k + i] * di + a[q * k + j] * dj;
    }
    for (std::size_t v : tie) {
      const double eps = 1e-10 * std::max(1.0, d[v]);
      st.sets[v] = r[v] <= eps ? SetKind::O : r[v] >= d[v] - eps ? SetKind::I : SetKind::M;
    }
  }
  refresh_margins(prob, st);
}

}  // namespace

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::m_to_o: return "M->O";
    case EventKind::m_to_i: return "M->I";
    case EventKind::o_to_m: return "O->M";
    case EventKind::i_to_m: return "I->M";
    case EventKind::empty_margin: return "empty-margin";
    case EventKind::completion: return "completion";
  }
  return "?";
}

EventKind parse_event_kind(const std::string& s) {
  for (EventKind k : {EventKind::m_to_o, EventKind::m_to_i, EventKind::o_to_m,
                      EventKind::i_to_m, EventKind::empty_margin, EventKind::completion}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown event kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// PathTrace

std::size_t PathTrace::breakpoints() const {
  std::size_t n = 0;
  for (const auto& e : events)
    if (e.kind != EventKind::completion) ++n;
  return n;
}

double PathTrace::mean_margin_size() const {
  if (events.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : events) s += static_cast<double>(e.m);
  return s / static_cast<double>(events.size());
}

const Segment* PathTrace::segment_at(double theta) const {
  if (segments.empty()) return nullptr;
  auto it = std::upper_bound(segments.begin(), segments.end(), theta,
                             [](double t, const Segment& s) { return t < s.theta0; });
  if (it == segments.begin()) return &segments.front();
  return &*(it - 1);
}

std::vector<double> PathTrace::alpha_at(double theta) const {
  std::vector<double> a(c_old.size(), 0.0);
  const Segment* s = segment_at(theta);
  if (!s) return terminal.alpha;
  const double dt = theta - s->theta0;
  for (std::size_t k = 0; k < s->m_ids.size(); ++k)
    a[static_cast<std::size_t>(s->m_ids[k])] = s->alpha0[k] + dt * s->rate[k];
  for (std::int32_t v : s->i_ids)
    a[static_cast<std::size_t>(v)] = weight(static_cast<std::size_t>(v), theta);
  return a;
}

double PathTrace::bias_at(double theta) const {
  const Segment* s = segment_at(theta);
  if (!s) return terminal.b;
  return s->b0 + (theta - s->theta0) * s->rate_b;
}

// ---------------------------------------------------------------------------
// PathFollower

PathFollower::PathFollower(const DualProblem& prob, const SolutionState& start,
                           std::span<const double> c_old, std::span<const double> c_new,
                           PathOptions opt)
    : prob_(prob), opt_(opt), n_(prob.size()), factor_(prob.has_bias()) {
  if (c_old.size() != n_ || c_new.size() != n_)
    throw ArgumentError("path: weight vectors must have one entry per variable");
  if (start.alpha.size() != n_) throw ArgumentError("path: start state has the wrong size");
  c0_.assign(c_old.begin(), c_old.end());
  cnew_.assign(c_new.begin(), c_new.end());
  d_.resize(n_);
  for (std::size_t v = 0; v < n_; ++v) {
    if (!(c0_[v] >= 0.0) || !(cnew_[v] >= 0.0) || !std::isfinite(c0_[v]) ||
        !std::isfinite(cnew_[v]))
      throw ArgumentError("path: weights must be finite and nonnegative");
    d_[v] = cnew_[v] - c0_[v];
  }
  st_ = start;
  const bool all_zero = std::all_of(c0_.begin(), c0_.end(), [](double c) { return c == 0.0; });
  if (prob_.has_bias() && all_zero) {
    zero_weight_start(prob_, d_, st_);
  } else {
    if (st_.sets.size() != n_) classify_sets(prob_, st_, c0_);
    if (st_.margin.size() != n_) refresh_margins(prob_, st_);
  }
  for (std::size_t v = 0; v < n_; ++v) {
    if (c0_[v] > 0.0 || (all_zero && prob_.has_bias())) continue;
    st_.alpha[v] = 0.0;
    if (frozen(v) || st_.margin[v] >= prob_.p(v)) st_.sets[v] = SetKind::O;
    else st_.sets[v] = SetKind::I;
  }
  mpos_.assign(n_, -1);
  for (std::size_t v = 0; v < n_; ++v) {
    if (st_.sets[v] == SetKind::M) {
      mpos_[v] = static_cast<std::ptrdiff_t>(mlist_.size());
      mlist_.push_back(v);
    }
  }
  scratch_.assign(prob_.items(), 0.0);
  cand_.assign(n_, inf);
  cand_kind_.assign(n_, cand_none);
  cycle_count_.assign(n_, 0);

  trace_.has_bias = prob_.has_bias();
  trace_.c_old = c0_;
  trace_.c_new = cnew_;
  refresh();
  trace_.refreshes = 0;
}

void PathFollower::refresh() {
  const std::size_t ni = prob_.items();
  u_.assign(ni, 0.0);
  delta_ = 0.0;
  std::vector<double> ai(ni, 0.0);
  double ysum_i = 0.0;
  for (std::size_t v = 0; v < n_; ++v) {
    if (st_.sets[v] != SetKind::I) continue;
    st_.alpha[v] = weight(v);
    if (d_[v] != 0.0) prob_.add_item_row(v, d_[v], u_);
    if (st_.alpha[v] != 0.0) prob_.add_item_row(v, st_.alpha[v], ai);
    delta_ += prob_.y(v) * d_[v];
    ysum_i += prob_.y(v) * st_.alpha[v];
  }
  for (std::size_t v = 0; v < n_; ++v)
    if (st_.sets[v] == SetKind::O) st_.alpha[v] = 0.0;

  const std::size_t k = mlist_.size();
  std::vector<double> inner(k * k), border(k);
  for (std::size_t a = 0; a < k; ++a) {
    border[a] = prob_.y(mlist_[a]);
    for (std::size_t b = 0; b <= a; ++b) {
      const double q = prob_.q(mlist_[a], mlist_[b]);
      inner[a * k + b] = q;
      inner[b * k + a] = q;
    }
  }
  try {
    factor_ = BorderedFactor::factor(inner, border, prob_.has_bias());
  } catch (const SingularityError& e) {
    escalate_ridge(std::string("refactor failed: ") + e.what());
    return;
  }
  if (k > 0) {
    std::vector<double> r(k);
    for (std::size_t a = 0; a < k; ++a)
      r[a] = prob_.p(mlist_[a]) - prob_.terms().gather(mlist_[a], ai);
    const auto sol = factor_.solve(-ysum_i, r);
    for (std::size_t a = 0; a < k; ++a) st_.alpha[mlist_[a]] = sol.x[a];
    if (prob_.has_bias()) st_.b = sol.x0;
  }
  refresh_margins(prob_, st_);
  for (std::size_t m : mlist_) st_.margin[m] = prob_.p(m);
  since_refresh_ = 0;
  ++trace_.refreshes;
}

void PathFollower::escalate_ridge(const std::string& why) {
  const double r = prob_.ridge();
  if (r >= opt_.max_ridge)
    throw PathError("path cannot proceed at ridge " + std::to_string(r) + ": " + why);
  prob_.set_ridge(r > 0.0 ? std::min(10.0 * r, opt_.max_ridge) : 1e-8);
  ++trace_.ridge_escalations;
  zero_streak_ = 0;
  for (std::size_t v : cycle_touched_) cycle_count_[v] = 0;
  cycle_touched_.clear();
  refresh();
}

PathFollower::Rates PathFollower::compute_phi() {
  Rates r;
  const std::size_t k = mlist_.size();
  if (k == 0) return r;
  std::vector<double> rhs(k);
  for (std::size_t a = 0; a < k; ++a) rhs[a] = -prob_.terms().gather(mlist_[a], u_);
  auto sol = factor_.solve(-delta_, rhs);
  double scale = 1.0 + std::abs(delta_);
  for (double x : rhs) scale = std::max(scale, 1.0 + std::abs(x));
  if (factor_.residual(sol, -delta_, rhs) > opt_.residual_tol * scale) {
    refresh();
    for (std::size_t a = 0; a < k; ++a) rhs[a] = -prob_.terms().gather(mlist_[a], u_);
    sol = factor_.solve(-delta_, rhs);
  }
  r.b = prob_.has_bias() ? sol.x0 : 0.0;
  r.m = std::move(sol.x);
  return r;
}

std::vector<double> PathFollower::compute_psi(const Rates& phi) const {
  std::vector<double> rows(u_);
  for (std::size_t a = 0; a < mlist_.size(); ++a)
    if (phi.m[a] != 0.0) prob_.add_item_row(mlist_[a], phi.m[a], rows);
  std::vector<double> psi(n_);
  if (opt_.parallel) kernels::gather_parallel(prob_.terms(), rows, psi);
  else kernels::gather_serial(prob_.terms(), rows, psi);
  const double ridge = prob_.ridge();
  const bool bias = prob_.has_bias();
  for (std::size_t v = 0; v < n_; ++v) {
    double rate = 0.0;
    if (st_.sets[v] == SetKind::I) rate = d_[v];
    else if (st_.sets[v] == SetKind::M) rate = phi.m[static_cast<std::size_t>(mpos_[v])];
    psi[v] += ridge * rate;
    if (bias) psi[v] += prob_.y(v) * phi.b;
  }
  for (std::size_t m : mlist_) psi[m] = 0.0;
  return psi;
}

PathFollower::Step PathFollower::max_step(const Rates& phi, std::span<const double> psi) const {
  const double tol = opt_.rate_tol;
  for (std::size_t v = 0; v < n_; ++v) {
    double best = inf;
    std::uint8_t kind = cand_none;
    if (!frozen(v)) {
      switch (st_.sets[v]) {
        case SetKind::M: {
          const double rate = phi.m[static_cast<std::size_t>(mpos_[v])];
          const double a = st_.alpha[v];
          if (rate < -tol) {
            best = std::max(0.0, a) / -rate;
            kind = cand_m_to_o;
          }
          if (rate - d_[v] > tol) {
            const double t = std::max(0.0, weight(v) - a) / (rate - d_[v]);
            if (t < best) {
              best = t;
              kind = cand_m_to_i;
            }
          }
          break;
        }
        case SetKind::O:
          if (psi[v] < -tol) {
            best = std::max(0.0, st_.margin[v] - prob_.p(v)) / -psi[v];
            kind = cand_o_to_m;
          }
          break;
        case SetKind::I:
          if (psi[v] > tol) {
            best = std::max(0.0, prob_.p(v) - st_.margin[v]) / psi[v];
            kind = cand_i_to_m;
          }
          break;
      }
    }
    cand_[v] = best;
    cand_kind_[v] = kind;
  }
  const auto am = opt_.parallel ? kernels::argmin_parallel(cand_, opt_.tie_tol)
                                : kernels::argmin_serial(cand_, opt_.tie_tol);
  const double remaining = 1.0 - theta_;
  if (am.index < 0 || am.value >= remaining) return {remaining, EventKind::completion, -1};
  return {am.value, kind_of(cand_kind_[static_cast<std::size_t>(am.index)]), am.index};
}

void PathFollower::record_segment(double theta0, double b0, const Rates& phi,
                                  const std::vector<double>& alpha_m0) {
  if (!opt_.record_segments) return;
  Segment s;
  s.theta0 = theta0;
  s.theta1 = theta_;
  s.b0 = b0;
  s.rate_b = phi.b;
  s.m_ids.reserve(mlist_.size());
  for (std::size_t m : mlist_) s.m_ids.push_back(static_cast<std::int32_t>(m));
  s.alpha0 = alpha_m0;
  s.rate = phi.m;
  if (s.rate.size() != s.m_ids.size()) s.rate.assign(s.m_ids.size(), 0.0);
  for (std::size_t v = 0; v < n_; ++v)
    if (st_.sets[v] == SetKind::I) s.i_ids.push_back(static_cast<std::int32_t>(v));
  trace_.segments.push_back(std::move(s));
}

void PathFollower::advance(double dtheta, const Rates& phi, std::span<const double> psi) {
  const double theta0 = theta_;
  const double b0 = st_.b;
  std::vector<double> alpha_m0(mlist_.size());
  for (std::size_t a = 0; a < mlist_.size(); ++a) alpha_m0[a] = st_.alpha[mlist_[a]];
  theta_ = dtheta >= 1.0 - theta0 ? 1.0 : theta0 + dtheta;
  const double dt = theta_ - theta0;
  for (std::size_t a = 0; a < mlist_.size(); ++a) st_.alpha[mlist_[a]] += dt * phi.m[a];
  if (prob_.has_bias()) st_.b += dt * phi.b;
  for (std::size_t v = 0; v < n_; ++v) {
    if (st_.sets[v] == SetKind::I) st_.alpha[v] = weight(v);
    st_.margin[v] += dt * psi[v];
  }
  for (std::size_t m : mlist_) st_.margin[m] = prob_.p(m);
  if (dt > 0.0) {
    record_segment(theta0, b0, phi, alpha_m0);
    zero_streak_ = 0;
  } else {
    ++zero_streak_;
  }
}

void PathFollower::add_to_bound(std::size_t v, double sign) {
  if (d_[v] != 0.0) prob_.add_item_row(v, sign * d_[v], u_);
  delta_ += sign * prob_.y(v) * d_[v];
}

void PathFollower::add_to_margin(std::size_t v) {
  st_.sets[v] = SetKind::M;
  std::vector<double> cross(mlist_.size());
  for (std::size_t a = 0; a < mlist_.size(); ++a) cross[a] = prob_.q(v, mlist_[a]);
  mpos_[v] = static_cast<std::ptrdiff_t>(mlist_.size());
  mlist_.push_back(v);
  st_.margin[v] = prob_.p(v);
  try {
    factor_.add_index(cross, prob_.q(v, v), prob_.y(v));
  } catch (const SingularityError& e) {
    escalate_ridge(std::string("margin set extension failed: ") + e.what());
  }
}

void PathFollower::remove_from_margin(std::size_t v) {
  const auto pos = static_cast<std::size_t>(mpos_[v]);
  factor_.remove_index(pos);
  mlist_.erase(mlist_.begin() + static_cast<std::ptrdiff_t>(pos));
  for (std::size_t a = pos; a < mlist_.size(); ++a)
    mpos_[mlist_[a]] = static_cast<std::ptrdiff_t>(a);
  mpos_[v] = -1;
}

void PathFollower::record_event(EventKind kind, Index index) {
  PathEvent e;
  e.ordinal = trace_.events.size() + 1;
  e.theta = theta_;
  e.kind = kind;
  e.index = index;
  e.m = mlist_.size();
  e.i = 0;
  for (std::size_t v = 0; v < n_; ++v)
    if (st_.sets[v] == SetKind::I) ++e.i;
  e.o = n_ - e.m - e.i;
  e.b = prob_.has_bias() ? st_.b : 0.0;
  e.objective = dual_objective(prob_, st_);
  trace_.events.push_back(e);
}

void PathFollower::apply_event(const Step& s) {
  const auto v = static_cast<std::size_t>(s.index);
  switch (s.kind) {
    case EventKind::m_to_o:
      remove_from_margin(v);
      st_.alpha[v] = 0.0;
      st_.sets[v] = SetKind::O;
      break;
    case EventKind::m_to_i:
      remove_from_margin(v);
      st_.alpha[v] = weight(v);
      st_.sets[v] = SetKind::I;
      add_to_bound(v, 1.0);
      break;
    case EventKind::o_to_m:
      st_.alpha[v] = 0.0;
      add_to_margin(v);
      break;
    case EventKind::i_to_m:
      add_to_bound(v, -1.0);
      st_.alpha[v] = weight(v);
      add_to_margin(v);
      break;
    default:
      throw ArgumentError("apply_event: not a set transition");
  }
  record_event(s.kind, s.index);

  if (std::abs(theta_ - cycle_theta_) > opt_.tie_tol) {
    for (std::size_t w : cycle_touched_) cycle_count_[w] = 0;
    cycle_touched_.clear();
    cycle_theta_ = theta_;
  }
  if (s.kind == EventKind::o_to_m || s.kind == EventKind::i_to_m) {
    if (cycle_count_[v]++ == 0) cycle_touched_.push_back(v);
    if (cycle_count_[v] > opt_.cycle_limit) {
      escalate_ridge("index " + std::to_string(v) + " cycles at theta " + std::to_string(theta_));
      return;
    }
  }
  if (zero_streak_ > n_ + 1) {
    escalate_ridge("too many consecutive zero-length steps");
    return;
  }
  if (++since_refresh_ >= opt_.refresh_every) refresh();
}

PathFollower::Step PathFollower::empty_margin_step() {
  double dsum = 0.0;
  for (std::size_t v = 0; v < n_; ++v)
    if (st_.sets[v] == SetKind::I) dsum += std::abs(d_[v]);
  const double dtol = opt_.rate_tol * std::max(1.0, dsum);

  // β_v = y_v (p_v − (Qα)_v): lower bounds on b from L, upper bounds from U.
  auto in_upper = [&](std::size_t v) {
    const double y = prob_.y(v);
    return (st_.sets[v] == SetKind::O && y < 0) || (st_.sets[v] == SetKind::I && y > 0);
  };
  std::vector<double> beta(n_);
  for (std::size_t v = 0; v < n_; ++v)
    beta[v] = prob_.y(v) * (prob_.p(v) - st_.margin[v]) + st_.b;

  auto enter = [&](std::size_t v, double b_new) {
    const double db = b_new - st_.b;
    if (db != 0.0)
      for (std::size_t w = 0; w < n_; ++w) st_.margin[w] += prob_.y(w) * db;
    st_.b = b_new;
    if (st_.sets[v] == SetKind::I) add_to_bound(v, -1.0);
    if (st_.sets[v] == SetKind::O) st_.alpha[v] = 0.0;
    add_to_margin(v);
    record_event(EventKind::empty_margin, static_cast<Index>(v));
    if (++since_refresh_ >= opt_.refresh_every) refresh();
  };

  if (std::abs(delta_) > dtol) {
    const bool up = delta_ > 0.0;
    std::ptrdiff_t best = -1;
    for (std::size_t v = 0; v < n_; ++v) {
      if (frozen(v) || st_.sets[v] == SetKind::M || in_upper(v) != up) continue;
      if (best < 0 || (up ? beta[v] < beta[static_cast<std::size_t>(best)]
                          : beta[v] > beta[static_cast<std::size_t>(best)]))
        best = static_cast<std::ptrdiff_t>(v);
    }
    // Rounding can leave θ a hair short of 1 with nothing left to enter.
    if (best < 0 && std::abs(delta_) * (1.0 - theta_) <= 1e-10)
      return {1.0 - theta_, EventKind::completion, -1};
    if (best < 0)
      throw PathError("empty margin: no index can absorb the equality drift at theta " +
                      std::to_string(theta_));
    enter(static_cast<std::size_t>(best), beta[static_cast<std::size_t>(best)]);
    ++zero_streak_;
    return {0.0, EventKind::empty_margin, best};
  }

  // δ = 0: b may stay anywhere in [ℓ, u]; trace both envelopes along θ.
  Rates none;
  const std::vector<double> psi0 = compute_psi(none);
  std::vector<double> slope(n_);
  for (std::size_t v = 0; v < n_; ++v) slope[v] = -prob_.y(v) * psi0[v];
  std::vector<std::size_t> uset, lset;
  for (std::size_t v = 0; v < n_; ++v) {
    if (frozen(v) || st_.sets[v] == SetKind::M) continue;
    (in_upper(v) ? uset : lset).push_back(v);
  }
  const double T = 1.0 - theta_;
  const double vtol = 1e-12;
  auto line = [&](std::size_t v, double t) { return beta[v] + t * slope[v]; };
  auto upper_active = [&](double t) {
    std::size_t best = uset.front();
    double bv = line(best, t);
    for (std::size_t v : uset) {
      const double x = line(v, t);
      if (x < bv - vtol || (x <= bv + vtol && slope[v] < slope[best])) {
        best = v;
        bv = x;
      }
    }
    return best;
  };
  auto lower_active = [&](double t) {
    std::size_t best = lset.front();
    double bv = line(best, t);
    for (std::size_t v : lset) {
      const double x = line(v, t);
      if (x > bv + vtol || (x >= bv - vtol && slope[v] > slope[best])) {
        best = v;
        bv = x;
      }
    }
    return best;
  };

  double t = 0.0;
  std::ptrdiff_t meet = -1;
  double b_meet = 0.0;
  if (!uset.empty() && !lset.empty()) {
    for (std::size_t guard = 0; guard < 4 * n_ + 8; ++guard) {
      const std::size_t iu = upper_active(t), il = lower_active(t);
      const double u = line(iu, t), l = line(il, t);
      if (u - l <= vtol) {
        meet = static_cast<std::ptrdiff_t>(iu);
        b_meet = u;
        break;
      }
      double next = T;
      bool meets = false;
      if (slope[il] > slope[iu]) {
        const double tm = t + (u - l) / (slope[il] - slope[iu]);
        if (tm <= next) {
          next = tm;
          meets = true;
        }
      }
      for (std::size_t v : uset) {
        if (slope[v] >= slope[iu]) continue;
        const double tv = t + (line(v, t) - u) / (slope[iu] - slope[v]);
        if (tv < next) {
          next = tv;
          meets = false;
        }
      }
      for (std::size_t v : lset) {
        if (slope[v] <= slope[il]) continue;
        const double tv = t + (l - line(v, t)) / (slope[v] - slope[il]);
        if (tv < next) {
          next = tv;
          meets = false;
        }
      }
      if (meets) {
        t = next;
        meet = static_cast<std::ptrdiff_t>(iu);
        b_meet = line(iu, t);
        break;
      }
      if (next >= T) {
        t = T;
        break;
      }
      t = std::max(next, t);
    }
  } else {
    t = T;
  }

  double b_target;
  if (meet >= 0) {
    b_target = b_meet;
  } else {
    t = T;
    b_target = st_.b;
    if (!lset.empty()) b_target = std::max(b_target, line(lower_active(T), T));
    if (!uset.empty()) b_target = std::min(b_target, line(upper_active(T), T));
  }
  if (t > 0.0) {
    Rates phi;
    phi.b = (b_target - st_.b) / t;
    std::vector<double> psi(psi0);
    for (std::size_t v = 0; v < n_; ++v) psi[v] += prob_.y(v) * phi.b;
    advance(t, phi, psi);
    if (meet < 0) st_.b = b_target;
  }
  if (meet < 0) return {t, EventKind::completion, -1};
  enter(static_cast<std::size_t>(meet), b_target);
  return {t, EventKind::empty_margin, meet};
}

PathTrace PathFollower::run() {
  const std::size_t budget = opt_.budget_factor * std::max<std::size_t>(n_, 1);
  while (theta_ < 1.0) {
    if (trace_.events.size() > budget)
      throw PathError("event budget of " + std::to_string(budget) + " exceeded at theta " +
                      std::to_string(theta_));
    if (prob_.has_bias() && mlist_.empty()) {
      const Step s = empty_margin_step();
      if (s.kind == EventKind::completion) break;
      continue;
    }
    const Rates phi = compute_phi();
    const std::vector<double> psi = compute_psi(phi);
    const Step s = max_step(phi, psi);
    advance(s.dtheta, phi, psi);
    if (s.kind == EventKind::completion) break;
    apply_event(s);
  }
  theta_ = 1.0;
  refresh();
  record_event(EventKind::completion, -1);
  trace_.terminal = st_;
  trace_.final_ridge = prob_.ridge();
  if (trace_.segments.empty() && opt_.record_segments) {
    Segment s;
    s.theta0 = 0.0;
    s.theta1 = 1.0;
    s.b0 = st_.b;
    for (std::size_t m : mlist_) {
      s.m_ids.push_back(static_cast<std::int32_t>(m));
      s.alpha0.push_back(st_.alpha[m]);
      s.rate.push_back(0.0);
    }
    for (std::size_t v = 0; v < n_; ++v)
      if (st_.sets[v] == SetKind::I) s.i_ids.push_back(static_cast<std::int32_t>(v));
    trace_.segments.push_back(std::move(s));
  }
  return std::move(trace_);
}

// ---------------------------------------------------------------------------
// Exact start states

KktReport exactness_report(const DualProblem& prob, const SolutionState& st,
                           std::span<const double> c) {
  return kkt_report(prob, st, c, 1e-12);
}

namespace {

// Re-solves (b, α_M) for the sets of `st` and reports whether the result is
// an exact optimum.
bool refine_with_sets(const DualProblem& prob, SolutionState& st, std::span<const double> c,
                      double tol) {
  const std::size_t n = prob.size();
  std::vector<std::size_t> m;
  std::vector<double> ai(prob.items(), 0.0);
  double ysum = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (c[v] <= 0.0) st.sets[v] = SetKind::O;
    switch (st.sets[v]) {
      case SetKind::O: st.alpha[v] = 0.0; break;
      case SetKind::I:
        st.alpha[v] = c[v];
        prob.add_item_row(v, c[v], ai);
        ysum += prob.y(v) * c[v];
        break;
      case SetKind::M: m.push_back(v); break;
    }
  }
  if (!m.empty()) {
    const std::size_t k = m.size();
    std::vector<double> inner(k * k), border(k), r(k);
    for (std::size_t a = 0; a < k; ++a) {
      border[a] = prob.y(m[a]);
      r[a] = prob.p(m[a]) - prob.terms().gather(m[a], ai);
      for (std::size_t b = 0; b < k; ++b) inner[a * k + b] = prob.q(m[a], m[b]);
    }
    try {
      const auto f = BorderedFactor::factor(inner, border, prob.has_bias());
      const auto sol = f.solve(-ysum, r);
      for (std::size_t a = 0; a < k; ++a) st.alpha[m[a]] = sol.x[a];
      if (prob.has_bias()) st.b = sol.x0;
    } catch (const SingularityError&) {
      return false;
    }
  } else if (prob.has_bias() && std::abs(ysum) > 1e-12 * (1.0 + std::abs(ysum))) {
    return false;
  }
  refresh_margins(prob, st);
  for (std::size_t v = 0; v < n; ++v) {
    if (c[v] <= 0.0) continue;
    const double gap = st.margin[v] - prob.p(v);
    switch (st.sets[v]) {
      case SetKind::O:
        if (gap < -tol) return false;
        break;
      case SetKind::I:
        if (gap > tol) return false;
        break;
      case SetKind::M:
        if (st.alpha[v] < -tol || st.alpha[v] > c[v] + tol) return false;
        st.alpha[v] = std::clamp(st.alpha[v], 0.0, c[v]);
        break;
    }
  }
  if (prob.has_bias() && m.empty()) {
    // b is free inside its interval; SMO's midpoint is admissible already.
  }
  return true;
}

}  // namespace

SolutionState exact_solve(const DualProblem& prob, std::span<const double> c,
                          const SolutionState* approx, const PathOptions& opt,
                          std::string* method) {
  const std::size_t n = prob.size();
  if (c.size() != n) throw ArgumentError("exact_solve: weight length differs from problem size");
  if (approx) {
    SolutionState st = *approx;
    if (st.sets.size() != n) classify_sets(prob, st, c);
    if (refine_with_sets(prob, st, c, opt.start_tol)) {
      if (method) *method = "given";
      return st;
    }
  }
  {
    SmoConfig tight;
    tight.tau = 1e-9;
    try {
      SolutionState s2 = smo_solve(prob, c, approx, tight);
      if (refine_with_sets(prob, s2, c, opt.start_tol)) {
        if (method) *method = "refined";
        return s2;
      }
    } catch (const ConvergenceError&) {
    }
  }
  SolutionState zero;
  zero.alpha.assign(n, 0.0);
  zero.b = prob.has_bias() ? prob.default_bias() : 0.0;
  refresh_margins(prob, zero);
  zero.sets.assign(n, SetKind::O);
  std::vector<double> zeros(n, 0.0);
  PathFollower pf(prob, zero, zeros, c, opt);
  PathTrace t = pf.run();
  if (method) *method = "zero-path";
  return std::move(t.terminal);
}

PathTrace follow_path(const DualProblem& prob, const SolutionState& start,
                      std::span<const double> c_old, std::span<const double> c_new,
                      const PathOptions& opt) {
  std::string method;
  const SolutionState exact = exact_solve(prob, c_old, &start, opt, &method);
  PathFollower pf(prob, exact, c_old, c_new, opt);
  PathTrace t = pf.run();
  t.start_method = method;
  return t;
}

// ---------------------------------------------------------------------------
// Serialization

void write_trace_csv(std::ostream& out, const PathTrace& trace) {
  out << "event_ordinal,theta,kind,index,m,o,i,b,objective\n";
  out.precision(17);
  for (const auto& e : trace.events) {
    out << e.ordinal << ',' << e.theta << ',' << to_string(e.kind) << ',' << e.index << ','
        << e.m << ',' << e.o << ',' << e.i << ',' << e.b << ',' << e.objective << '\n';
  }
}

std::string trace_to_json(const PathTrace& t) {
  using nlohmann::json;
  json j;
  j["has_bias"] = t.has_bias;
  j["c_old"] = t.c_old;
  j["c_new"] = t.c_new;
  j["start_method"] = t.start_method;
  j["refreshes"] = t.refreshes;
  j["ridge_escalations"] = t.ridge_escalations;
  j["final_ridge"] = t.final_ridge;
  json ev = json::array();
  for (const auto& e : t.events) {
    ev.push_back({{"ordinal", e.ordinal}, {"theta", e.theta}, {"kind", to_string(e.kind)},
                  {"index", e.index}, {"m", e.m}, {"o", e.o}, {"i", e.i}, {"b", e.b},
                  {"objective", e.objective}});
  }
  j["events"] = ev;
  json seg = json::array();
  for (const auto& s : t.segments) {
    seg.push_back({{"theta0", s.theta0}, {"theta1", s.theta1}, {"b0", s.b0},
                   {"rate_b", s.rate_b}, {"m_ids", s.m_ids}, {"alpha0", s.alpha0},
                   {"rate", s.rate}, {"i_ids", s.i_ids}});
  }
  j["segments"] = seg;
  json term;
  term["alpha"] = t.terminal.alpha;
  term["b"] = t.terminal.b;
  std::string sets;
  for (SetKind s : t.terminal.sets) sets.push_back(to_char(s));
  term["sets"] = sets;
  term["margin"] = t.terminal.margin;
  j["terminal"] = term;
  return j.dump();
}

PathTrace trace_from_json(const std::string& text) {
  using nlohmann::json;
  PathTrace t;
  try {
    const json j = json::parse(text);
    t.has_bias = j.at("has_bias").get<bool>();
    t.c_old = j.at("c_old").get<std::vector<double>>();
    t.c_new = j.at("c_new").get<std::vector<double>>();
    t.start_method = j.value("start_method", std::string("given"));
    t.refreshes = j.value("refreshes", std::size_t{0});
    t.ridge_escalations = j.value("ridge_escalations", std::size_t{0});
    t.final_ridge = j.value("final_ridge", 0.0);
    for (const auto& e : j.at("events")) {
      PathEvent pe;
      pe.ordinal = e.at("ordinal").get<std::size_t>();
      pe.theta = e.at("theta").get<double>();
      pe.kind = parse_event_kind(e.at("kind").get<std::string>());
      pe.index = e.at("index").get<Index>();
      pe.m = e.at("m").get<std::size_t>();
      pe.o = e.at("o").get<std::size_t>();
      pe.i = e.at("i").get<std::size_t>();
      pe.b = e.at("b").get<double>();
      pe.objective = e.at("objective").get<double>();
      t.events.push_back(pe);
    }
    for (const auto& s : j.at("segments")) {
      Segment sg;
      sg.theta0 = s.at("theta0").get<double>();
      sg.theta1 = s.at("theta1").get<double>();
      sg.b0 = s.at("b0").get<double>();
      sg.rate_b = s.at("rate_b").get<double>();
      sg.m_ids = s.at("m_ids").get<std::vector<std::int32_t>>();
      sg.alpha0 = s.at("alpha0").get<std::vector<double>>();
      sg.rate = s.at("rate").get<std::vector<double>>();
      sg.i_ids = s.at("i_ids").get<std::vector<std::int32_t>>();
      t.segments.push_back(std::move(sg));
    }
    const json& term = j.at("terminal");
    t.terminal.alpha = term.at("alpha").get<std::vector<double>>();
    t.terminal.b = term.at("b").get<double>();
    for (char ch : term.at("sets").get<std::string>()) {
      t.terminal.sets.push_back(ch == 'M' ? SetKind::M : ch == 'I' ? SetKind::I : SetKind::O);
    }
    t.terminal.margin = term.at("margin").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("trace JSON: ") + e.what());
  }
  if (t.c_old.size() != t.c_new.size())
    throw ParseError("trace JSON: weight vectors differ in length");
  return t;
}

}  // namespace wsvm
