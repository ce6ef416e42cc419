#include "cder/cover_tree.hpp"

#include "cder/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cder {

namespace {

constexpr double kRadiusGuard = 1e-12;      // relative inflation of r0
constexpr double kMinRadiusFraction = 1e-12; // termination floor, relative to r0

} // namespace

FriendRadii friend_radii(double theta, double r_level) {
    if (!(theta > 0.0 && theta < 1.0)) throw InputError("theta must lie in (0,1)");
    if (!(r_level > 0.0)) throw InputError("level radius must be positive");
    return FriendRadii{(2.0 + theta) * r_level,
                       (2.0 + 2.0 * theta) * r_level,
                       2.0 / (1.0 - theta) * r_level};
}

ElderShortcut elder_shortcut(double theta) {
    const double eps = 1e-15;
    if (std::abs(theta - 0.5) <= eps) return ElderShortcut::Type2;
    if (std::abs(theta - (std::sqrt(2.0) - 1.0)) <= eps) return ElderShortcut::Type3;
    if (std::abs(theta - (std::sqrt(5.0) - 1.0) / 2.0) <= eps) return ElderShortcut::Type1;
    return ElderShortcut::None;
}

CoverTree::CoverTree(PooledPoints pooled, CoverTreeConfig config)
    : pooled_(std::move(pooled)), config_(config) {
    if (!(config_.theta > 0.0 && config_.theta < 1.0))
        throw InputError("theta must lie in (0,1)");
    const int n = pooled_.size();
    if (n < 1) throw InputError("no points");
    if (pooled_.num_labels < 1) throw InputError("pooled points carry no labels");
    shortcut_ = elder_shortcut(config_.theta);

    int root = 0;
    if (config_.root_policy == RootPolicy::NearestToCentroid) {
        Eigen::RowVectorXd centroid = (pooled_.weight.transpose() * pooled_.coords) / pooled_.weight.sum();
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double d2 = (pooled_.coords.row(i) - centroid).squaredNorm();
            if (d2 < best) {
                best = d2;
                root = i;
            }
        }
    }

    double max_d2 = 0.0;
    for (int i = 0; i < n; ++i) max_d2 = std::max(max_d2, point_dist2(root, i));
    if (max_d2 == 0.0) {
        r0_ = 1.0;
        degenerate_ = true;
    } else {
        r0_ = std::sqrt(max_d2) * (1.0 + kRadiusGuard);
    }

    adults_.push_back(Adult{root, 0, 0, {0}});
    point_adult_.assign(n, -1);
    point_adult_[root] = 0;

    CoverTreeLevel lv;
    lv.level = 0;
    lv.radius = r0_;
    lv.adult_count = 1;
    lv.guardian.assign(n, 0);
    lv.children.resize(1);
    lv.children[0].resize(n);
    std::iota(lv.children[0].begin(), lv.children[0].end(), 0);
    lv.friends1 = {{0}};
    lv.friends2 = {{0}};
    lv.friends3 = {{0}};
    lv.max_child_dist2 = max_d2;
    weigh(lv);
    levels_.push_back(std::move(lv));
}

void CoverTree::weigh(CoverTreeLevel& lv) const {
    const int l = pooled_.num_labels;
    const int d = pooled_.dimension();
    lv.label_weights = Matrix::Zero(lv.adult_count, l);
    lv.label_means = Matrix::Zero(static_cast<Eigen::Index>(lv.adult_count) * l, d);
    for (int a = 0; a < lv.adult_count; ++a) {
        for (int x : lv.children[a]) {
            const int lab = pooled_.label[x];
            lv.label_weights(a, lab) += pooled_.weight[x];
            lv.label_means.row(static_cast<Eigen::Index>(a) * l + lab) +=
                pooled_.weight[x] * pooled_.coords.row(x);
        }
        for (int lab = 0; lab < l; ++lab) {
            const double w = lv.label_weights(a, lab);
            if (w > 0.0) lv.label_means.row(static_cast<Eigen::Index>(a) * l + lab) /= w;
        }
    }
}

int CoverTree::pred_at_transition(int adult, int next_level) const {
    return adults_[adult].cohort == next_level ? adults_[adult].predecessor : adult;
}

std::vector<int> CoverTree::elders_at(int level, int adult) const {
    if (adults_[adult].cohort == level) return adults_[adult].elders;
    return {adult};
}

std::vector<int> CoverTree::find_and_sort_orphans(int level, int adult) const {
    const CoverTreeLevel& lv = this->level(level);
    const double r_next = lv.radius * config_.theta;
    const double r_next2 = r_next * r_next;
    const int anchor = adults_[adult].point;

    std::vector<int> orphans;
    for (int x : lv.children[adult])
        if (point_dist2(anchor, x) > r_next2) orphans.push_back(x);
    if (orphans.size() <= 1) return orphans;

    const int l = pooled_.num_labels;
    std::vector<int> label_order;
    for (int lab = 0; lab < l; ++lab)
        if (lv.label_weights(adult, lab) > 0.0) label_order.push_back(lab);
    std::stable_sort(label_order.begin(), label_order.end(), [&](int a, int b) {
        return lv.label_weights(adult, a) > lv.label_weights(adult, b);
    });

    // One queue per label: every orphan ranked by distance to that label's
    // weighted mean. Orphans are drawn round-robin across queues, skipping
    // ones already taken. Queues hold positions into `orphans`, which is in
    // ascending point order, so distance ties resolve to the lower point.
    const int count = static_cast<int>(orphans.size());
    std::vector<std::vector<int>> queues(label_order.size());
    std::vector<std::pair<double, int>> ranked(count);
    for (size_t q = 0; q < label_order.size(); ++q) {
        const Eigen::Index mean_row =
            static_cast<Eigen::Index>(adult) * l + label_order[q];
        for (int i = 0; i < count; ++i) {
            const double d2 =
                (pooled_.coords.row(orphans[i]) - lv.label_means.row(mean_row)).squaredNorm();
            ranked[i] = {d2, i};
        }
        std::sort(ranked.begin(), ranked.end());
        queues[q].resize(count);
        for (int i = 0; i < count; ++i) queues[q][i] = ranked[i].second;
    }

    std::vector<int> ordered;
    ordered.reserve(count);
    std::vector<size_t> cursor(queues.size(), 0);
    std::vector<char> taken(count, 0);
    while (static_cast<int>(ordered.size()) < count) {
        for (size_t q = 0; q < queues.size() && static_cast<int>(ordered.size()) < count; ++q) {
            while (cursor[q] < queues[q].size() && taken[queues[q][cursor[q]]]) ++cursor[q];
            if (cursor[q] < queues[q].size()) {
                const int pos = queues[q][cursor[q]++];
                taken[pos] = 1;
                ordered.push_back(orphans[pos]);
            }
        }
    }
    return ordered;
}

const CoverTreeLevel& CoverTree::advance_level() {
    const CoverTreeLevel& prev = levels_.back();
    const int n = pooled_.size();
    const int ell = prev.level;
    const double r_next = prev.radius * config_.theta;
    const double r_next2 = r_next * r_next;

    CoverTreeLevel next;
    next.level = ell + 1;
    next.radius = r_next;
    next.guardian = prev.guardian;
    next.successors.resize(prev.adult_count);
    for (int a = 0; a < prev.adult_count; ++a) next.successors[a].push_back(a);

    // Orphan, then adopt or emancipate, adult by adult in level order.
    for (int ai = 0; ai < prev.adult_count; ++ai) {
        const std::vector<int> orphans = find_and_sort_orphans(ell, ai);
        for (int x : orphans) {
            int best = -1;
            double best_d2 = std::numeric_limits<double>::infinity();
            auto consider = [&](int cand) {
                const double d2 = point_dist2(x, adults_[cand].point);
                if (d2 <= r_next2 && (d2 < best_d2 || (d2 == best_d2 && cand < best))) {
                    best = cand;
                    best_d2 = d2;
                }
            };
            if (config_.exhaustive_scans) {
                for (int cand = 0; cand < static_cast<int>(adults_.size()); ++cand) consider(cand);
            } else {
                for (int f : prev.friends1[ai])
                    for (int cand : next.successors[f]) consider(cand);
            }
            if (best >= 0) {
                next.guardian[x] = best;
            } else {
                const int id = static_cast<int>(adults_.size());
                adults_.push_back(Adult{x, ell + 1, ai, {}});
                point_adult_[x] = id;
                next.successors[ai].push_back(id);
                next.guardian[x] = id;
            }
        }
    }
    next.adult_count = static_cast<int>(adults_.size());

    // Exchange teens: every non-adult child moves to its nearest adult if
    // that is strictly closer than its current guardian. Youngins (within
    // r/2) can have no strictly nearer adult and are skipped.
    const double half_r2 = 0.25 * r_next2;
    for (int x = 0; x < n; ++x) {
        if (point_adult_[x] >= 0) continue;
        const int g = next.guardian[x];
        const double dg2 = point_dist2(x, adults_[g].point);
        if (dg2 <= half_r2) continue;
        int best = g;
        double best_d2 = dg2;
        auto consider = [&](int cand) {
            if (cand == g) return;
            const double d2 = point_dist2(x, adults_[cand].point);
            if (d2 < best_d2 || (d2 == best_d2 && best != g && cand < best)) {
                best = cand;
                best_d2 = d2;
            }
        };
        if (config_.exhaustive_scans) {
            for (int cand = 0; cand < next.adult_count; ++cand) consider(cand);
        } else {
            const int pg = pred_at_transition(g, ell + 1);
            for (int f : prev.friends2[pg])
                for (int cand : next.successors[f]) consider(cand);
        }
        if (best != g) next.guardian[x] = best;
    }

    next.children.resize(next.adult_count);
    next.max_child_dist2 = 0.0;
    {
        std::vector<int> counts(next.adult_count, 0);
        for (int x = 0; x < n; ++x) counts[next.guardian[x]]++;
        for (int a = 0; a < next.adult_count; ++a) next.children[a].reserve(counts[a]);
    }
    for (int x = 0; x < n; ++x) {
        const int g = next.guardian[x];
        next.children[g].push_back(x);
        next.max_child_dist2 = std::max(next.max_child_dist2, point_dist2(x, adults_[g].point));
    }

    // Befriend. Candidate pairs are successors of previous-level type-3
    // friend pairs; each unordered pair is generated exactly once because a
    // new adult has a unique predecessor. A first pass over the pairs
    // counts list sizes so each list is allocated exactly once.
    next.friends1.resize(next.adult_count);
    next.friends2.resize(next.adult_count);
    next.friends3.resize(next.adult_count);
    const FriendRadii fr = friend_radii(config_.theta, r_next);
    const double t1_2 = fr.t1 * fr.t1;
    const double t2_2 = fr.t2 * fr.t2;
    const double t3_2 = fr.t3 * fr.t3;
    std::vector<int> count1(next.adult_count, 1);  // every list holds self
    std::vector<int> count2(next.adult_count, 1);
    std::vector<int> count3(next.adult_count, 1);
    auto visit_pairs = [&](auto&& pair_fn) {
        if (config_.exhaustive_scans) {
            for (int k = 0; k < next.adult_count; ++k)
                for (int h = 0; h < k; ++h) pair_fn(k, h);
        } else {
            for (int k = 0; k < next.adult_count; ++k) {
                const int pk = pred_at_transition(k, ell + 1);
                for (int f : prev.friends3[pk])
                    for (int h : next.successors[f])
                        if (h < k) pair_fn(k, h);
            }
        }
    };
    visit_pairs([&](int k, int h) {
        const double d2 = point_dist2(adults_[k].point, adults_[h].point);
        if (d2 > t3_2) return;
        count3[k]++;
        count3[h]++;
        if (d2 > t2_2) return;
        count2[k]++;
        count2[h]++;
        if (d2 > t1_2) return;
        count1[k]++;
        count1[h]++;
    });
    for (int k = 0; k < next.adult_count; ++k) {
        next.friends1[k].reserve(count1[k]);
        next.friends2[k].reserve(count2[k]);
        next.friends3[k].reserve(count3[k]);
    }
    visit_pairs([&](int k, int h) {
        const double d2 = point_dist2(adults_[k].point, adults_[h].point);
        if (d2 > t3_2) return;
        next.friends3[k].push_back(h);
        next.friends3[h].push_back(k);
        if (d2 > t2_2) return;
        next.friends2[k].push_back(h);
        next.friends2[h].push_back(k);
        if (d2 > t1_2) return;
        next.friends1[k].push_back(h);
        next.friends1[h].push_back(k);
    });
    for (int k = 0; k < next.adult_count; ++k) {
        next.friends1[k].push_back(k);
        next.friends2[k].push_back(k);
        next.friends3[k].push_back(k);
        std::sort(next.friends1[k].begin(), next.friends1[k].end());
        std::sort(next.friends2[k].begin(), next.friends2[k].end());
        std::sort(next.friends3[k].begin(), next.friends3[k].end());
    }

    // Elders of the new cohort: previous-level adults within r_l + r_{l+1}.
    const double elder_r = prev.radius + r_next;
    const double elder_r2 = elder_r * elder_r;
    for (int k = prev.adult_count; k < next.adult_count; ++k) {
        std::vector<int>& eld = adults_[k].elders;
        if (config_.exhaustive_scans) {
            for (int a = 0; a < prev.adult_count; ++a)
                if (point_dist2(adults_[k].point, adults_[a].point) <= elder_r2)
                    eld.push_back(a);
        } else if (shortcut_ != ElderShortcut::None) {
            const std::vector<int>& list = shortcut_ == ElderShortcut::Type1 ? next.friends1[k]
                                         : shortcut_ == ElderShortcut::Type2 ? next.friends2[k]
                                                                             : next.friends3[k];
            for (int a : list)
                if (a < prev.adult_count) eld.push_back(a);
        } else {
            // Any elder is a type-1 friend of the predecessor.
            for (int a : prev.friends1[adults_[k].predecessor])
                if (point_dist2(adults_[k].point, adults_[a].point) <= elder_r2)
                    eld.push_back(a);
        }
        std::sort(eld.begin(), eld.end());
    }

    weigh(next);
    levels_.push_back(std::move(next));
    return levels_.back();
}

bool CoverTree::can_advance() const {
    const CoverTreeLevel& last = levels_.back();
    if (config_.max_level && last.level + 1 > *config_.max_level) return false;
    return last.radius * config_.theta >= kMinRadiusFraction * r0_;
}

void CoverTree::build_full() {
    while (!levels_.back().structurally_final() && can_advance()) advance_level();
}

bool CoverTree::ensure_level(int level) {
    while (depth() < level) {
        if (!can_advance()) return false;
        advance_level();
    }
    return true;
}

} // namespace cder
