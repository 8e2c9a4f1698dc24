#include "semisup/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace semisup {

ReachabilityProfile optics(const Matrix& points, Index minpts, double epsilon) {
  if (minpts < 2) throw ValidationError("optics: minpts must be >= 2");
  const Index n = points.rows();
  ReachabilityProfile prof;
  prof.minpts = minpts;
  prof.epsilon = epsilon;
  prof.core_distances.assign(static_cast<std::size_t>(n), kUndefined);

  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<double> sorted;
  const auto distances_from = [&](Index p) {
    for (Index j = 0; j < n; ++j) dist[static_cast<std::size_t>(j)] = (points.row(p) - points.row(j)).norm();
  };
  const auto core_of = [&](Index p) {
    sorted.clear();
    for (Index j = 0; j < n; ++j)
      if (j != p && dist[static_cast<std::size_t>(j)] <= epsilon) sorted.push_back(dist[static_cast<std::size_t>(j)]);
    if (static_cast<Index>(sorted.size()) < minpts) return kUndefined;
    std::nth_element(sorted.begin(), sorted.begin() + (minpts - 1), sorted.end());
    return sorted[static_cast<std::size_t>(minpts - 1)];
  };

  std::vector<bool> processed(static_cast<std::size_t>(n), false);
  std::vector<double> reach(static_cast<std::size_t>(n), kUndefined);
  std::vector<bool> in_seeds(static_cast<std::size_t>(n), false);

  const auto expand = [&](Index p) {
    distances_from(p);
    const double core = core_of(p);
    prof.core_distances[static_cast<std::size_t>(p)] = core;
    if (core == kUndefined) return;
    for (Index o = 0; o < n; ++o) {
      if (processed[static_cast<std::size_t>(o)] || o == p) continue;
      const double d = dist[static_cast<std::size_t>(o)];
      if (d > epsilon) continue;
      const double r = std::max(core, d);
      if (r < reach[static_cast<std::size_t>(o)]) {
        reach[static_cast<std::size_t>(o)] = r;
        in_seeds[static_cast<std::size_t>(o)] = true;
      }
    }
  };

  for (Index start = 0; start < n; ++start) {
    if (processed[static_cast<std::size_t>(start)]) continue;
    processed[static_cast<std::size_t>(start)] = true;
    prof.ordering.push_back(start);
    prof.reachability.push_back(kUndefined);
    expand(start);
    for (;;) {
      Index next = -1;
      for (Index o = 0; o < n; ++o) {
        if (!in_seeds[static_cast<std::size_t>(o)] || processed[static_cast<std::size_t>(o)]) continue;
        if (next < 0 || reach[static_cast<std::size_t>(o)] < reach[static_cast<std::size_t>(next)]) next = o;
      }
      if (next < 0) break;
      processed[static_cast<std::size_t>(next)] = true;
      in_seeds[static_cast<std::size_t>(next)] = false;
      prof.ordering.push_back(next);
      prof.reachability.push_back(reach[static_cast<std::size_t>(next)]);
      expand(next);
    }
  }
  return prof;
}

Extrema optics_extrema(const ReachabilityProfile& profile, Index window) {
  if (window < 1) throw ValidationError("optics_extrema: window must be >= 1");
  Extrema ex;
  const auto& r = profile.reachability;
  const auto n = static_cast<Index>(r.size());
  bool any_finite = false;
  for (const double v : r) any_finite = any_finite || std::isfinite(v);
  if (!any_finite) {
    ex.warnings.push_back("reachability profile is entirely undefined; no extrema selected");
    return ex;
  }
  for (Index pos = 1; pos + 1 < n; ++pos) {
    const double v = r[static_cast<std::size_t>(pos)];
    if (!std::isfinite(v)) continue;
    bool is_max = true;
    bool is_min = true;
    bool compared = false;
    for (Index q = std::max<Index>(0, pos - window); q <= std::min<Index>(n - 1, pos + window); ++q) {
      if (q == pos) continue;
      const double w = r[static_cast<std::size_t>(q)];
      if (!std::isfinite(w)) continue;
      compared = true;
      if (w >= v) is_max = false;
      if (w <= v) is_min = false;
    }
    if (!compared) continue;
    if (is_max) ex.maxima.push_back(pos);
    if (is_min) ex.minima.push_back(pos);
  }
  return ex;
}

std::vector<Index> optics_extrema_samples(const ReachabilityProfile& profile, Index window) {
  const Extrema ex = optics_extrema(profile, window);
  std::vector<Index> positions = ex.maxima;
  positions.insert(positions.end(), ex.minima.begin(), ex.minima.end());
  std::sort(positions.begin(), positions.end());
  std::vector<Index> out;
  for (const Index p : positions) out.push_back(profile.ordering[static_cast<std::size_t>(p)]);
  return out;
}

std::vector<std::vector<Index>> optics_valleys(const ReachabilityProfile& profile, Index window) {
  const Extrema ex = optics_extrema(profile, window);
  const auto n = static_cast<Index>(profile.ordering.size());
  std::vector<bool> cut(static_cast<std::size_t>(n), false);
  for (const Index p : ex.maxima) cut[static_cast<std::size_t>(p)] = true;
  for (Index p = 0; p < n; ++p)
    if (!std::isfinite(profile.reachability[static_cast<std::size_t>(p)])) cut[static_cast<std::size_t>(p)] = true;
  std::vector<std::vector<Index>> out;
  for (Index p = 0; p < n; ++p) {
    if (cut[static_cast<std::size_t>(p)] || out.empty()) out.emplace_back();
    out.back().push_back(profile.ordering[static_cast<std::size_t>(p)]);
  }
  return out;
}

}  // namespace semisup
