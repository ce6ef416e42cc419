#pragma once

// Weighted label entropy and the entropy-guided region selection loop.
//
// For an adult a_i at level l, three nested regions are compared:
//   alpha = children of a_i at level l+1
//   beta  = children of a_i at level l
//   gamma = union of the children (at level l-1) of the elders of a_i
//           (just a_i's own l-1 children when its cohort is l-1 or older;
//           all points at level 0)
// How the entropies of alpha/beta/gamma order each other decides whether
// the region produces a coordinate (entropy falls inward), keeps being
// tracked at a finer scale, hands tracking to its successors, or is
// dropped. Candidates start at the root and the loop stops as soon as the
// candidate set empties, typically well above the tree's full depth.

#include "cder/core.hpp"
#include "cder/cover_tree.hpp"

#include <optional>
#include <vector>

namespace cder {

/// Label entropy of a non-negative weight vector, normalized to [0,1] by
/// using log base L: 0 for a single surviving label, 1 for a uniform
/// spread. Scale-invariant. Throws InputError when all weights are zero.
double entropy(const Vector& label_weights);

enum class DecisionKind {
    Build,
    Pass,
    AppendSelf,
    AppendSuccessorsExceptSelf,
    AppendAllSuccessors,
};

const char* decision_name(DecisionKind kind);

/// Region entropies are estimates from finitely many weighted samples;
/// differences below this resolution are treated as ties when the decision
/// table orders them. Exact comparisons make the branch taken for
/// statistically indistinguishable regions a coin flip, which shatters
/// homogeneous regions instead of building them once at their natural
/// scale.
inline constexpr double kEntropyTieTolerance = 0.01;

/// An entropy this close to 1 is saturated: the formula's accumulated
/// rounding puts an exactly-balanced region within a few ulps of 1 on
/// either side, so the saturation test cannot be exact.
inline constexpr double kEntropySaturation = 1.0 - 1e-12;

/// A region whose own entropy sits above this carries no usable label
/// signal: committing a coordinate there would record near-zero certainty
/// and stop the region from ever being refined. The build branch requires
/// the region below the gate; otherwise evaluation falls through to the
/// exploration branches.
inline constexpr double kBuildInformationGate = 0.95;

/// The decision table over S(alpha), S(beta), S(gamma). Evaluated strictly
/// in order; differences within `tie_tolerance` count as ties and fall to
/// the earliest matching branch. Note the fifth ordering test repeats the
/// second with a different action and is therefore unreachable; it is kept
/// so the evaluation order is explicit.
DecisionKind decide(double s_alpha, double s_beta, double s_gamma,
                    int alpha_children, int beta_children,
                    double tie_tolerance = kEntropyTieTolerance);

struct RegionTriple {
    std::vector<int> alpha;
    std::vector<int> beta;
    std::vector<int> gamma;
};

/// Materializes the three nested regions for `adult` at `level`. Levels
/// level+1 (and level-1 when level > 0) must already be built.
RegionTriple gather_regions(const CoverTree& tree, int adult, int level);

struct BuildEvent {
    int adult = 0;
    int level = 0;
    double radius = 0.0;
    std::vector<int> dominant_labels;  ///< share > 1/L, heaviest first
    std::vector<int> region;           ///< children of the adult at `level`
    double s_alpha = 0.0;
    double s_beta = 0.0;
    double s_gamma = 0.0;
    /// Entropy lost on the region when non-dominant labels are erased,
    /// clamped to [0,1]; 1 - delta_entropy is the region's certainty.
    double delta_entropy = 0.0;
    Vector label_weights;              ///< per-label weights of the region
};

struct SelectConfig {
    double theta = 0.5;
    bool parsimonious = true;
    RootPolicy root_policy = RootPolicy::NearestToCentroid;
    std::optional<int> max_level;
};

struct LevelTrace {
    int level = 0;
    int adults = 0;       ///< |A_l|
    int candidates = 0;   ///< candidates entering this level
    int builds = 0;
    int coordinates = 0;  ///< dominant labels summed over builds
    double radius = 0.0;
};

struct SelectionResult {
    std::vector<BuildEvent> events;  ///< coarse-to-fine
    CoverTree tree;                  ///< built only as deep as selection needed
    std::vector<LevelTrace> trace;
    int stop_level = 0;              ///< level at which the candidate set emptied
};

SelectionResult select_regions(PooledPoints pooled, const SelectConfig& config = {});

} // namespace cder
