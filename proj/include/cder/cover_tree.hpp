#pragma once

// Level-by-level cover tree over a pooled weighted point set.
//
// A cover tree is a filtration A_0 c A_1 c ... of the point set. Members of
// A_l are "adults"; every point is assigned to a guardian adult within the
// level radius r_l = r_0 * theta^l (covering), and distinct adults are more
// than r_l apart (separation). When the radius shrinks, children farther
// than the new radius are orphaned and either adopted by a nearby adult or
// emancipated as new adults (their "cohort" is the level of emancipation).
//
// Candidate scans are restricted by friend lists: adults within
//   T1 = (2 + theta) r,   T2 = (2 + 2 theta) r,   T3 = 2 r / (1 - theta)
// of each other. T1 bounds who can adopt an orphan, T2 bounds where a teen
// (a child farther than r/2 from its guardian) can be exchanged to, and T3
// supports the level-to-level friend recursion. An "elder" of a new adult of
// cohort l+1 is any level-l adult within r_l + r_{l+1}; elders of
// pre-existing adults are themselves. For theta in {sqrt(2)-1, 1/2,
// (sqrt(5)-1)/2} the elder threshold coincides with T3, T2, or T1 at the
// next level, so elders fall out of the friend lists for free.
//
// Each level also stores per-adult, per-label weight totals and weighted
// means for the guarded children; these drive the orphan processing order
// and everything downstream.

#include "cder/core.hpp"

#include <optional>
#include <vector>

namespace cder {

enum class RootPolicy { FirstPoint, NearestToCentroid };

struct CoverTreeConfig {
    double theta = 0.5;
    RootPolicy root_policy = RootPolicy::NearestToCentroid;
    std::optional<int> max_level;

    /// Reference mode for testing: every candidate scan (adoption, teen
    /// exchange, befriending, elders) runs over all adults instead of
    /// friend-restricted sets. Must produce an identical tree.
    bool exhaustive_scans = false;
};

struct FriendRadii {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

/// Friend thresholds at a level of radius `r_level`. Throws InputError for
/// theta outside (0,1) or a non-positive radius.
FriendRadii friend_radii(double theta, double r_level);

/// Which friend list carries the elders exactly, if any, for this theta.
enum class ElderShortcut { None, Type1, Type2, Type3 };
ElderShortcut elder_shortcut(double theta);

struct Adult {
    int point = 0;        ///< row in the pooled matrix
    int cohort = 0;       ///< level at which this point became an adult
    int predecessor = 0;  ///< adult id at the previous level (self if cohort 0)
    std::vector<int> elders; ///< cohort-1 level adults within r_{c-1} + r_c
};

struct CoverTreeLevel {
    int level = 0;
    double radius = 0.0;
    int adult_count = 0;

    std::vector<int> guardian;                ///< point row -> adult id
    std::vector<std::vector<int>> children;   ///< adult id -> guarded point rows
    std::vector<std::vector<int>> friends1;   ///< self-inclusive, symmetric
    std::vector<std::vector<int>> friends2;
    std::vector<std::vector<int>> friends3;
    /// For each previous-level adult: itself followed by the adults it
    /// emancipated into this level, in emancipation order.
    std::vector<std::vector<int>> successors;

    Matrix label_weights;  ///< adult_count x L
    Matrix label_means;    ///< (adult * L + label) row, valid when weight > 0
    double max_child_dist2 = 0.0;

    /// True once no adult guards anything beyond co-located duplicates;
    /// deeper levels can only shrink radii.
    bool structurally_final() const { return max_child_dist2 == 0.0; }
};

class CoverTree {
public:
    /// Builds level 0: a single root adult guarding every point. The root
    /// radius is the max distance to the root inflated by a relative 1e-12
    /// so covering survives rounding; an all-duplicate input gets radius 1
    /// and is flagged degenerate.
    CoverTree(PooledPoints pooled, CoverTreeConfig config);

    /// Advances one level: shrink the radius, orphan far children, adopt or
    /// emancipate them, exchange teens to their nearest adult, rebuild
    /// friend lists and elders, and recompute per-label statistics.
    const CoverTreeLevel& advance_level();

    /// False once the next radius would drop below 1e-12 * r0 or past the
    /// configured level cap.
    bool can_advance() const;

    /// Advances until the structure stops changing (or a guard trips).
    void build_full();

    /// Advances until `level` exists; false if a guard stops construction first.
    bool ensure_level(int level);

    const PooledPoints& pooled() const { return pooled_; }
    const CoverTreeConfig& config() const { return config_; }
    double root_radius() const { return r0_; }
    bool degenerate_radius() const { return degenerate_; }
    int depth() const { return levels_.back().level; }
    const std::vector<CoverTreeLevel>& levels() const { return levels_; }
    const CoverTreeLevel& level(int l) const { return levels_.at(static_cast<size_t>(l)); }
    const std::vector<Adult>& adults() const { return adults_; }
    int num_labels() const { return pooled_.num_labels; }

    /// Elders of `adult` as seen at `level`: the stored emancipation-time
    /// list for adults of that cohort, otherwise the adult itself.
    std::vector<int> elders_at(int level, int adult) const;

    /// The children `adult` would orphan when level `level` shrinks onto the
    /// next one, in processing order: labels are ranked by the adult's
    /// per-label weight (heaviest first), and orphans are drawn round-robin
    /// from per-label queues ordered by distance to that label's mean.
    std::vector<int> find_and_sort_orphans(int level, int adult) const;

    double point_dist2(int a, int b) const {
        return (pooled_.coords.row(a) - pooled_.coords.row(b)).squaredNorm();
    }

private:
    void weigh(CoverTreeLevel& lv) const;
    int pred_at_transition(int adult, int next_level) const;

    PooledPoints pooled_;
    CoverTreeConfig config_;
    ElderShortcut shortcut_ = ElderShortcut::None;
    double r0_ = 0.0;
    bool degenerate_ = false;
    std::vector<Adult> adults_;
    std::vector<int> point_adult_;  ///< point row -> adult id, -1 if not an adult
    std::vector<CoverTreeLevel> levels_;
};

} // namespace cder
