#include "semisup/sampling.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace semisup {

SamplingPlan kennard_stone(const Matrix& points, Index m, KsStart start) {
  const Index n = points.rows();
  if (m < 2 || m > n)
    throw ValidationError("kennard_stone: m = " + std::to_string(m) + " outside 2.." + std::to_string(n));
  SamplingPlan plan;
  plan.strategy = "KenStone";
  plan.parameters["m"] = std::to_string(m);
  plan.parameters["start"] = start == KsStart::MaxPair ? "max_pair" : "nearest_mean";

  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Vector min_dist = Vector::Constant(n, kUndefined);
  const auto take = [&](Index i) {
    taken[static_cast<std::size_t>(i)] = true;
    plan.selected.push_back(i);
    for (Index j = 0; j < n; ++j) min_dist[j] = std::min(min_dist[j], (points.row(i) - points.row(j)).norm());
  };

  if (start == KsStart::MaxPair) {
    double best = -1.0;
    Index a = 0, b = 1;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const double d = (points.row(i) - points.row(j)).squaredNorm();
        if (d > best) {
          best = d;
          a = i;
          b = j;
        }
      }
    take(a);
    take(b);
    plan.audit.push_back(std::sqrt(best));
  } else {
    const Eigen::RowVectorXd mean = points.colwise().mean();
    Index best = 0;
    double best_d = kUndefined;
    for (Index i = 0; i < n; ++i) {
      const double d = (points.row(i) - mean).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    take(best);
  }

  while (static_cast<Index>(plan.selected.size()) < m) {
    Index pick = -1;
    double far = -1.0;
    for (Index j = 0; j < n; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      if (min_dist[j] > far) {
        far = min_dist[j];
        pick = j;
      }
    }
    plan.audit.push_back(far);
    take(pick);
  }
  return plan;
}

namespace {

Vector prototype(const Matrix& points, const std::vector<Index>& members, Metric metric) {
  const Index d = points.cols();
  Vector c = Vector::Zero(d);
  if (members.empty()) return c;
  if (metric == Metric::L1) {
    std::vector<double> col(members.size());
    for (Index j = 0; j < d; ++j) {
      for (std::size_t r = 0; r < members.size(); ++r) col[r] = points(members[r], j);
      std::sort(col.begin(), col.end());
      const std::size_t h = col.size() / 2;
      c[j] = col.size() % 2 == 1 ? col[h] : 0.5 * (col[h - 1] + col[h]);
    }
    return c;
  }
  for (const Index i : members) c += points.row(i).transpose();
  c /= static_cast<double>(members.size());
  if (metric == Metric::Cosine) {
    const double norm = c.norm();
    if (norm > 0.0) c /= norm;
  }
  return c;
}

}  // namespace

double cluster_objective(const Matrix& points, const std::vector<Index>& assignment, const Matrix& centroids,
                         Metric metric) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i)
    total += distance(points.row(i).transpose(), centroids.row(assignment[static_cast<std::size_t>(i)] - 1).transpose(), metric);
  return total;
}

ClusterResult kmeans(const Matrix& points, Index k, Metric metric, std::uint64_t seed, int max_iterations) {
  const Index n = points.rows();
  if (k < 1 || k > n)
    throw ValidationError("kmeans: k = " + std::to_string(k) + " outside 1.." + std::to_string(n));
  Rng rng(seed);
  const auto dist = [&](Index i, const Vector& c) { return distance(points.row(i).transpose(), c, metric); };

  ClusterResult out;
  out.metric = metric;
  out.centroids.resize(k, points.cols());

  // k-means++ seeding over distinct picks.
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::uniform_int_distribution<Index> first(0, n - 1);
  Index pick = first(rng);
  chosen[static_cast<std::size_t>(pick)] = true;
  out.centroids.row(0) = points.row(pick);
  Vector weight(n);
  for (Index c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      double best = kUndefined;
      for (Index j = 0; j < c; ++j) best = std::min(best, dist(i, out.centroids.row(j).transpose()));
      const double w = chosen[static_cast<std::size_t>(i)] ? 0.0 : (metric == Metric::SqEuclidean ? best : best * best);
      weight[i] = w;
      total += w;
    }
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      pick = -1;
      for (Index i = 0; i < n; ++i) {
        if (weight[i] <= 0.0) continue;
        acc += weight[i];
        pick = i;
        if (acc >= target) break;
      }
    } else {
      // Remaining points coincide with chosen centres: take the first unused one.
      pick = 0;
      while (chosen[static_cast<std::size_t>(pick)]) ++pick;
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    out.centroids.row(c) = points.row(pick);
  }

  out.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<Index> next(static_cast<std::size_t>(n));
  for (int it = 0; it < max_iterations; ++it) {
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = kUndefined;
      for (Index c = 0; c < k; ++c) {
        const double d = dist(i, out.centroids.row(c).transpose());
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      next[static_cast<std::size_t>(i)] = best + 1;
    }
    // Empty-cluster repair: move the farthest member of the largest cluster.
    for (;;) {
      std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
      for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(next[static_cast<std::size_t>(i)] - 1)].push_back(i);
      auto empty = std::find_if(members.begin(), members.end(), [](const auto& m) { return m.empty(); });
      if (empty == members.end()) break;
      std::size_t largest = 0;
      for (std::size_t c = 1; c < members.size(); ++c)
        if (members[c].size() > members[largest].size()) largest = c;
      const Vector proto = prototype(points, members[largest], metric);
      Index far = members[largest].front();
      double far_d = -1.0;
      for (const Index i : members[largest]) {
        const double d = dist(i, proto);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      next[static_cast<std::size_t>(far)] = static_cast<Index>(empty - members.begin()) + 1;
    }
    const bool unchanged = it > 0 && next == out.assignment;
    out.assignment = next;
    if (unchanged) break;
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(i)] - 1)].push_back(i);
    for (Index c = 0; c < k; ++c) out.centroids.row(c) = prototype(points, members[static_cast<std::size_t>(c)], metric).transpose();
    out.objective_trace.push_back(cluster_objective(points, out.assignment, out.centroids, metric));
    out.iterations = it + 1;
  }
  out.objective = cluster_objective(points, out.assignment, out.centroids, metric);
  return out;
}

Strategy parse_strategy(const std::string& name) {
  std::string s;
  for (const char ch : name) {
    if (ch == ' ' || ch == '-' || ch == '_') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "opticsextrema") return Strategy::OpticsExtrema;
  if (s == "smrs") return Strategy::Smrs;
  if (s == "opticssmrs") return Strategy::OpticsSmrs;
  if (s == "kmeanssmrs") return Strategy::KmeansSmrs;
  if (s == "kenstone" || s == "kennardstone") return Strategy::KenStone;
  if (s == "random") return Strategy::Random;
  if (s == "kmeansrandom") return Strategy::KmeansRandom;
  throw ValidationError("unknown sampling strategy '" + name + "'");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::OpticsExtrema: return "OPTICS_EXTREMA";
    case Strategy::Smrs: return "SMRS";
    case Strategy::OpticsSmrs: return "OPTICS_SMRS";
    case Strategy::KmeansSmrs: return "KMEANS_SMRS";
    case Strategy::KenStone: return "KENSTONE";
    case Strategy::Random: return "RANDOM";
    case Strategy::KmeansRandom: return "KMEANS_RANDOM";
  }
  return "?";
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> all = {Strategy::OpticsExtrema, Strategy::Smrs,    Strategy::OpticsSmrs,
                                            Strategy::KmeansSmrs,    Strategy::KenStone, Strategy::Random,
                                            Strategy::KmeansRandom};
  return all;
}

AugmentPolicy parse_augment_policy(const std::string& name) {
  if (name == "none") return AugmentPolicy::None;
  if (name == "minority") return AugmentPolicy::Minority;
  if (name == "majority") return AugmentPolicy::Majority;
  throw ValidationError("unknown augmentation policy '" + name + "'");
}

Index heuristic_cluster_count(Index n) {
  return static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n) / 2.0)));
}

Index heuristic_cluster_quota(Index n, Index k) { return k > 0 ? n / k : n; }

Index default_minpts(Index n) {
  return std::max<Index>(2, static_cast<Index>(std::ceil(std::log2(static_cast<double>(std::max<Index>(n, 2))))));
}

namespace {

Matrix gather_rows(const Matrix& points, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = points.row(rows[r]);
  return out;
}

// SMRS inside each group; indices mapped back to rows of the full set.
void smrs_per_group(const Matrix& points, const std::vector<std::vector<Index>>& groups, const SmrsOptions& opt,
                    SamplingPlan& plan) {
  for (const auto& group : groups) {
    if (group.empty()) continue;
    if (group.size() == 1) {
      plan.selected.push_back(group.front());
      continue;
    }
    const SmrsResult r = smrs(gather_rows(points, group), opt);
    plan.converged = plan.converged && r.plan.converged;
    for (const Index local : r.plan.selected) plan.selected.push_back(group[static_cast<std::size_t>(local)]);
  }
}

}  // namespace

SamplingPlan sample(const Dataset& d, const StrategySpec& spec) {
  const auto started = std::chrono::steady_clock::now();
  const Index n = d.size();
  const Matrix& x = d.features;
  if (n < 2) throw ValidationError("sample: need at least 2 samples");
  SamplingPlan plan;
  Rng rng(spec.seed);

  switch (spec.strategy) {
    case Strategy::Random: {
      std::vector<Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto m = std::clamp<Index>(static_cast<Index>(std::lround(spec.random_fraction * static_cast<double>(n))), 1, n);
      plan.selected.assign(perm.begin(), perm.begin() + m);
      plan.parameters["fraction"] = format_real(spec.random_fraction);
      break;
    }
    case Strategy::KenStone: {
      const Index budget = spec.budget ? *spec.budget
                                       : static_cast<Index>(std::lround(spec.random_fraction * static_cast<double>(n)));
      plan = kennard_stone(x, std::clamp<Index>(budget, 2, n), spec.ks_start);
      break;
    }
    case Strategy::KmeansRandom:
    case Strategy::KmeansSmrs: {
      const Index k = std::min(heuristic_cluster_count(n), n);
      const ClusterResult cr = kmeans(x, k, Metric::SqEuclidean, spec.seed);
      std::vector<std::vector<Index>> groups(static_cast<std::size_t>(k));
      for (Index i = 0; i < n; ++i) groups[static_cast<std::size_t>(cr.assignment[static_cast<std::size_t>(i)] - 1)].push_back(i);
      plan.parameters["k"] = std::to_string(k);
      if (spec.strategy == Strategy::KmeansRandom) {
        const Index quota = heuristic_cluster_quota(n, k);
        plan.parameters["m_c"] = std::to_string(quota);
        for (auto& g : groups) {
          std::shuffle(g.begin(), g.end(), rng);
          const auto take = std::min<std::size_t>(g.size(), static_cast<std::size_t>(quota));
          plan.selected.insert(plan.selected.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(take));
        }
      } else {
        smrs_per_group(x, groups, spec.smrs, plan);
      }
      break;
    }
    case Strategy::OpticsExtrema:
    case Strategy::OpticsSmrs: {
      const Index minpts = spec.minpts ? *spec.minpts : default_minpts(n);
      const ReachabilityProfile profile = optics(x, minpts, spec.epsilon);
      plan.parameters["minpts"] = std::to_string(minpts);
      plan.parameters["window"] = std::to_string(spec.window);
      if (spec.strategy == Strategy::OpticsExtrema) {
        const Extrema ex = optics_extrema(profile, spec.window);
        plan.warnings = ex.warnings;
        plan.selected = optics_extrema_samples(profile, spec.window);
      } else {
        smrs_per_group(x, optics_valleys(profile, spec.window), spec.smrs, plan);
      }
      break;
    }
    case Strategy::Smrs: {
      const SmrsResult r = smrs(x, spec.smrs);
      plan.selected = r.plan.selected;
      plan.converged = r.plan.converged;
      plan.parameters["lambda"] = format_real(r.lambda);
      break;
    }
  }
  plan.strategy = to_string(spec.strategy);
  plan.parameters["seed"] = std::to_string(spec.seed);

  // Distinctness guard for strategies that merge groups.
  {
    std::set<Index> seen;
    std::vector<Index> unique;
    for (const Index i : plan.selected)
      if (seen.insert(i).second) unique.push_back(i);
    plan.selected = std::move(unique);
  }

  if (spec.augment != AugmentPolicy::None && d.class_count >= 2) {
    const auto counts = d.class_counts();
    int target = 0;
    for (int c = 1; c <= d.class_count; ++c) {
      const Index cnt = counts[static_cast<std::size_t>(c - 1)];
      if (cnt == 0) continue;
      if (target == 0) {
        target = c;
        continue;
      }
      const Index best = counts[static_cast<std::size_t>(target - 1)];
      if ((spec.augment == AugmentPolicy::Minority && cnt < best) || (spec.augment == AugmentPolicy::Majority && cnt > best))
        target = c;
    }
    if (target > 0) {
      std::set<Index> have(plan.selected.begin(), plan.selected.end());
      for (Index i = 0; i < n; ++i) {
        if (d.labels[static_cast<std::size_t>(i)] == target && !have.count(i)) {
          plan.selected.push_back(i);
          ++plan.minority_added;
        }
      }
      plan.augmented_minority = true;
      plan.parameters["augment_class"] = std::to_string(target);
    }
  }
  plan.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return plan;
}

std::string plan_to_csv(const SamplingPlan& plan, const Dataset& d) {
  std::ostringstream out;
  out << "position,sample_id,strategy,flags\n";
  const std::size_t base = plan.selected.size() - static_cast<std::size_t>(plan.minority_added);
  for (std::size_t p = 0; p < plan.selected.size(); ++p) {
    out << p << ',' << d.sample_ids[static_cast<std::size_t>(plan.selected[p])] << ',' << plan.strategy << ','
        << (p >= base ? "augmented" : "") << '\n';
  }
  return out.str();
}

void save_plan(const SamplingPlan& plan, const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << plan_to_csv(plan, d);
}

std::string plan_summary_json(const SamplingPlan& plan, const Dataset& d) {
  nlohmann::json j;
  j["strategy"] = plan.strategy;
  j["selected"] = plan.selected.size();
  j["augmented_minority"] = plan.augmented_minority;
  j["minority_added"] = plan.minority_added;
  j["converged"] = plan.converged;
  j["sampling_seconds"] = plan.seconds;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : plan.parameters) params[k] = v;
  j["parameters"] = params;
  nlohmann::json counts = nlohmann::json::object();
  Index unlabeled = 0;
  for (const Index i : plan.selected) {
    const auto& l = d.labels[static_cast<std::size_t>(i)];
    if (!l) {
      ++unlabeled;
      continue;
    }
    const std::string name = d.class_names[static_cast<std::size_t>(*l - 1)];
    counts[name] = counts.value(name, 0) + 1;
  }
  j["counts_per_class"] = counts;
  j["unlabeled_selected"] = unlabeled;
  j["warnings"] = plan.warnings;
  return j.dump(2);
}

}  // namespace semisup
