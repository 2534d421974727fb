#include "wsvm/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

namespace wsvm {

namespace {

constexpr double merge_tol = 1e-12;

struct Cut {
  double theta;
  long cause, cause2;
};

// Sorted cut points inside (lo, hi), merged when closer than merge_tol.
std::vector<Cut> tidy_cuts(std::vector<Cut> cuts, double lo, double hi) {
  std::vector<Cut> kept;
  std::sort(cuts.begin(), cuts.end(), [](const Cut& x, const Cut& y) {
    if (x.theta != y.theta) return x.theta < y.theta;
    return x.cause < y.cause;
  });
  for (const Cut& c : cuts) {
    if (!(c.theta > lo + merge_tol && c.theta < hi - merge_tol)) continue;
    if (!kept.empty() && c.theta - kept.back().theta <= merge_tol) continue;
    kept.push_back(c);
  }
  return kept;
}

// Appends pieces for one region, evaluating the metric at each sub-interval
// midpoint, and merges neighbours with equal metric.
template <class Eval>
void append_region(SelectionPath& out, double lo, double hi, const std::vector<Cut>& cuts,
                   long first_cause, Eval&& eval) {
  double from = lo;
  long cause = first_cause, cause2 = -1;
  for (std::size_t k = 0; k <= cuts.size(); ++k) {
    const double to = k < cuts.size() ? cuts[k].theta : hi;
    if (to > from) {
      const double m = eval(0.5 * (from + to));
      if (!out.pieces.empty() && out.pieces.back().metric == m) {
        out.pieces.back().to = to;
      } else {
        out.pieces.push_back({from, to, m, cause, cause2});
      }
    }
    if (k < cuts.size()) {
      from = to;
      cause = cuts[k].cause;
      cause2 = cuts[k].cause2;
    }
  }
}

template <class Body>
SelectionPath over_lines(std::span<const LineSet> lines, Body&& body) {
  SelectionPath out;
  for (const LineSet& l : lines) {
    if (!(l.theta1 > l.theta0)) continue;
    body(out, l);
  }
  if (!out.pieces.empty()) {
    out.pieces.front().from = 0.0;
    out.pieces.back().to = 1.0;
  }
  return out;
}

void check_size(std::span<const LineSet> lines, std::size_t n, const char* what) {
  for (const LineSet& l : lines)
    if (l.a.size() != n || l.b.size() != n)
      throw ArgumentError(std::string(what) + ": size mismatch");
}

std::vector<double> scores_at(const LineSet& l, double theta) {
  std::vector<double> s(l.a.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = l.at(i, theta);
  return s;
}

}  // namespace

ValidationKernel::ValidationKernel(const DualProblem& prob, const Dataset& validation)
    : prob_(&prob), nv_(validation.size()), ni_(prob.items()), k_(nv_ * ni_) {
  if (validation.dim() != prob.kernel().dim())
    throw ArgumentError("validation inputs have a different dimension from the training set");
  for (std::size_t i = 0; i < nv_; ++i)
    prob.kernel().cross_row(validation.row(i), std::span<double>(k_.data() + i * ni_, ni_));
}

double ValidationKernel::g(std::size_t i, std::size_t v) const {
  return prob_->terms().gather(v, std::span<const double>(k_.data() + i * ni_, ni_));
}

LineSet validation_coefficients(const PathTrace& trace, const Segment& seg,
                                const ValidationKernel& vk) {
  const std::size_t nv = vk.size();
  LineSet l;
  l.theta0 = seg.theta0;
  l.theta1 = seg.theta1;
  const double rb = trace.has_bias ? seg.rate_b : 0.0;
  const double b0 = trace.has_bias ? seg.b0 : 0.0;
  l.a.assign(nv, rb);
  std::vector<double> f0(nv, b0);
  for (std::size_t k = 0; k < seg.m_ids.size(); ++k) {
    const auto v = static_cast<std::size_t>(seg.m_ids[k]);
    for (std::size_t i = 0; i < nv; ++i) {
      const double g = vk.g(i, v);
      l.a[i] += seg.rate[k] * g;
      f0[i] += seg.alpha0[k] * g;
    }
  }
  for (std::int32_t sv : seg.i_ids) {
    const auto v = static_cast<std::size_t>(sv);
    const double d = trace.c_new[v] - trace.c_old[v];
    const double c0 = trace.weight(v, seg.theta0);
    if (d == 0.0 && c0 == 0.0) continue;
    for (std::size_t i = 0; i < nv; ++i) {
      const double g = vk.g(i, v);
      l.a[i] += d * g;
      f0[i] += c0 * g;
    }
  }
  l.b.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) l.b[i] = f0[i] - l.a[i] * seg.theta0;
  return l;
}

double SelectionPath::value_at(double theta) const {
  if (pieces.empty()) return 0.0;
  auto it = std::upper_bound(pieces.begin(), pieces.end(), theta,
                             [](double t, const Piece& p) { return t < p.from; });
  if (it == pieces.begin()) return pieces.front().metric;
  return (it - 1)->metric;
}

std::vector<double> SelectionPath::change_points() const {
  std::vector<double> c;
  for (std::size_t k = 1; k < pieces.size(); ++k) c.push_back(pieces[k].from);
  return c;
}

const SelectionPath::Piece& SelectionPath::best(bool maximize) const {
  if (pieces.empty()) throw ArgumentError("empty selection path");
  std::size_t b = 0;
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    if (maximize ? pieces[k].metric > pieces[b].metric : pieces[k].metric < pieces[b].metric)
      b = k;
  }
  return pieces[b];
}

double zero_one_error(std::span<const double> f, std::span<const double> labels,
                      std::span<const double> costs) {
  double err = 0.0, total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = costs.empty() ? 1.0 : costs[i];
    total += w;
    if (labels[i] * f[i] <= 0.0) err += w;
  }
  return total > 0.0 ? err / total : 0.0;
}

std::vector<LineSet> trace_lines(const PathTrace& trace, const ValidationKernel& vk) {
  std::vector<LineSet> lines;
  for (const Segment& seg : trace.segments)
    if (seg.theta1 > seg.theta0) lines.push_back(validation_coefficients(trace, seg, vk));
  return lines;
}

SelectionPath zero_one_error_path(std::span<const LineSet> lines, std::span<const double> labels,
                                  std::span<const double> costs) {
  check_size(lines, labels.size(), "zero_one_error_path");
  if (!costs.empty() && costs.size() != labels.size())
    throw ArgumentError("zero_one_error_path: cost count mismatch");
  return over_lines(lines, [&](SelectionPath& out, const LineSet& l) {
    std::vector<Cut> cuts;
    for (std::size_t i = 0; i < l.a.size(); ++i) {
      if (l.a[i] == 0.0) continue;
      cuts.push_back({-l.b[i] / l.a[i], static_cast<long>(i), -1});
    }
    cuts = tidy_cuts(std::move(cuts), l.theta0, l.theta1);
    append_region(out, l.theta0, l.theta1, cuts, -1, [&](double t) {
      return zero_one_error(scores_at(l, t), labels, costs);
    });
  });
}

SelectionPath zero_one_error_path(const PathTrace& trace, const ValidationKernel& vk,
                                  std::span<const double> labels,
                                  std::span<const double> costs) {
  if (labels.size() != vk.size()) throw ArgumentError("zero_one_error_path: label count mismatch");
  return zero_one_error_path(trace_lines(trace, vk), labels, costs);
}

SquaredLossBest squared_loss_best_theta(std::span<const LineSet> lines,
                                        std::span<const double> targets) {
  check_size(lines, targets.size(), "squared_loss_best_theta");
  SquaredLossBest best;
  bool have = false;
  for (const LineSet& l : lines) {
    // loss(t) = Σ (r_i − a_i t)² with r_i = y_i − f_i(θ0) and t = θ − θ0.
    double saa = 0.0, sar = 0.0;
    for (std::size_t i = 0; i < l.a.size(); ++i) {
      const double r = targets[i] - l.at(i, l.theta0);
      saa += l.a[i] * l.a[i];
      sar += l.a[i] * r;
    }
    double t = 0.0;
    if (saa > 0.0) t = std::clamp(sar / saa, 0.0, l.theta1 - l.theta0);
    const double theta = l.theta0 + t;
    double loss = 0.0;
    for (std::size_t i = 0; i < l.a.size(); ++i) {
      const double e = targets[i] - l.at(i, theta);
      loss += e * e;
    }
    if (!have || loss < best.loss) {
      best = {theta, loss};
      have = true;
    }
  }
  return best;
}

SquaredLossBest squared_loss_best_theta(const PathTrace& trace, const ValidationKernel& vk,
                                        std::span<const double> targets) {
  if (targets.size() != vk.size())
    throw ArgumentError("squared_loss_best_theta: target count mismatch");
  return squared_loss_best_theta(trace_lines(trace, vk), targets);
}

double ndcg_at_k(std::span<const double> scores, std::span<const double> relevance,
                 std::size_t k) {
  if (k == 0) throw ArgumentError("ndcg_at_k: k must be at least 1");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ideal(relevance.begin(), relevance.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  auto discount = [](std::size_t j) { return j == 1 ? 1.0 : std::log2(static_cast<double>(j)); };
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t j = 1; j <= std::min(k, n); ++j) {
    dcg += (std::exp2(relevance[order[j - 1]]) - 1.0) / discount(j);
    idcg += (std::exp2(ideal[j - 1]) - 1.0) / discount(j);
  }
  if (idcg <= 0.0) return 1.0;
  return dcg / idcg;
}

double mean_ndcg(std::span<const double> scores, std::span<const double> relevance,
                 std::span<const int> queries, std::size_t k) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < scores.size(); ++i)
    groups[queries.empty() ? 0 : queries[i]].push_back(i);
  double sum = 0.0;
  for (const auto& [q, idx] : groups) {
    std::vector<double> s, r;
    for (std::size_t i : idx) {
      s.push_back(scores[i]);
      r.push_back(relevance[i]);
    }
    sum += ndcg_at_k(s, r, k);
  }
  return groups.empty() ? 1.0 : sum / static_cast<double>(groups.size());
}

namespace {

// Swaps touching the first k ranks of one query inside (lo, hi): adjacent
// swaps within the top k, plus any outside item overtaking the k-th one.
void top_k_cuts(const LineSet& l, const std::vector<std::size_t>& items, std::size_t k,
                std::vector<Cut>& cuts) {
  const double lo = l.theta0, hi = l.theta1;
  std::vector<std::size_t> order(items);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double sx = l.at(x, lo), sy = l.at(y, lo);
    if (sx != sy) return sx > sy;
    if (l.a[x] != l.a[y]) return l.a[x] > l.a[y];
    return x < y;
  });
  const std::size_t top = std::min(k, order.size());
  if (top == 0) return;
  // Time at which `lower` overtakes `upper`, if it does after t.
  auto overtake = [&](std::size_t upper, std::size_t lower, double t) {
    if (!(l.a[lower] > l.a[upper])) return hi;
    const double tx = (l.b[upper] - l.b[lower]) / (l.a[lower] - l.a[upper]);
    return std::max(tx, t);
  };
  double t = lo;
  const std::size_t guard = 4 * (order.size() + 1) * (order.size() + 1) + 16;
  for (std::size_t step = 0; step < guard; ++step) {
    double next = hi;
    std::ptrdiff_t pos = -1;
    for (std::size_t r = 0; r + 1 < top; ++r) {
      const double tx = overtake(order[r], order[r + 1], t);
      if (tx < next) {
        next = tx;
        pos = static_cast<std::ptrdiff_t>(r);
      }
    }
    std::ptrdiff_t challenger = -1;
    for (std::size_t r = top; r < order.size(); ++r) {
      const double tx = overtake(order[top - 1], order[r], t);
      if (tx < next) {
        next = tx;
        challenger = static_cast<std::ptrdiff_t>(r);
        pos = -1;
      }
    }
    if (next >= hi) break;
    t = next;
    if (challenger >= 0) {
      const auto r = static_cast<std::size_t>(challenger);
      cuts.push_back({t, static_cast<long>(order[top - 1]), static_cast<long>(order[r])});
      std::swap(order[top - 1], order[r]);
    } else {
      const auto r = static_cast<std::size_t>(pos);
      cuts.push_back({t, static_cast<long>(order[r]), static_cast<long>(order[r + 1])});
      std::swap(order[r], order[r + 1]);
    }
  }
}

}  // namespace

SelectionPath ndcg_path(std::span<const LineSet> lines, std::span<const double> relevance,
                        std::span<const int> queries, std::size_t k, NdcgSweep sweep) {
  if (k == 0) throw ArgumentError("ndcg_path: k must be at least 1");
  check_size(lines, relevance.size(), "ndcg_path");
  if (!queries.empty() && queries.size() != relevance.size())
    throw ArgumentError("ndcg_path: query count mismatch");
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < relevance.size(); ++i)
    groups[queries.empty() ? 0 : queries[i]].push_back(i);
  return over_lines(lines, [&](SelectionPath& out, const LineSet& l) {
    std::vector<Cut> cuts;
    for (const auto& [q, idx] : groups) {
      if (sweep == NdcgSweep::top_k) {
        top_k_cuts(l, idx, k, cuts);
        continue;
      }
      for (std::size_t x = 0; x < idx.size(); ++x) {
        for (std::size_t y = x + 1; y < idx.size(); ++y) {
          const std::size_t i = idx[x], j = idx[y];
          if (relevance[i] == relevance[j] || l.a[i] == l.a[j]) continue;
          cuts.push_back({(l.b[j] - l.b[i]) / (l.a[i] - l.a[j]), static_cast<long>(i),
                          static_cast<long>(j)});
        }
      }
    }
    cuts = tidy_cuts(std::move(cuts), l.theta0, l.theta1);
    append_region(out, l.theta0, l.theta1, cuts, -1, [&](double t) {
      return mean_ndcg(scores_at(l, t), relevance, queries, k);
    });
  });
}

SelectionPath ndcg_path(const PathTrace& trace, const ValidationKernel& vk,
                        std::span<const double> relevance, std::span<const int> queries,
                        std::size_t k, NdcgSweep sweep) {
  if (trace.has_bias) throw ArgumentError("ndcg_path expects a bias-free ranking trace");
  if (relevance.size() != vk.size()) throw ArgumentError("ndcg_path: relevance count mismatch");
  return ndcg_path(trace_lines(trace, vk), relevance, queries, k, sweep);
}

void write_selection_csv(std::ostream& out, const SelectionPath& path) {
  out << "theta_from,theta_to,metric,cause\n";
  out.precision(17);
  for (const auto& p : path.pieces) {
    out << p.from << ',' << p.to << ',' << p.metric << ',';
    if (p.cause >= 0) out << p.cause;
    if (p.cause2 >= 0) out << ':' << p.cause2;
    out << '\n';
  }
}

}  // namespace wsvm
