#include "cder/entropy.hpp"

#include "cder/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cder {

double entropy(const Vector& label_weights) {
    const int l = static_cast<int>(label_weights.size());
    double total = 0.0;
    for (int i = 0; i < l; ++i) {
        const double w = label_weights[i];
        if (std::isnan(w)) throw NumericError("NaN label weight");
        if (w < 0.0) throw InputError("negative label weight");
        total += w;
    }
    if (total <= 0.0) throw InputError("empty region");

    // An exactly uniform vector must saturate at exactly 1.0; the summed
    // formula can land one ulp below it when L is not a power of two.
    if (l >= 2) {
        bool uniform = true;
        for (int i = 1; i < l; ++i) uniform &= label_weights[i] == label_weights[0];
        if (uniform) return 1.0;
    }

    double s = 0.0;
    for (int i = 0; i < l; ++i) {
        const double p = label_weights[i] / total;
        if (p > 0.0) s -= p * std::log(p);
    }
    if (s <= 0.0) return 0.0;  // single surviving label (any L, including 1)
    s /= std::log(static_cast<double>(l));
    return std::clamp(s, 0.0, 1.0);
}

const char* decision_name(DecisionKind kind) {
    switch (kind) {
        case DecisionKind::Build: return "build";
        case DecisionKind::Pass: return "pass";
        case DecisionKind::AppendSelf: return "append-self";
        case DecisionKind::AppendSuccessorsExceptSelf: return "append-successors";
        case DecisionKind::AppendAllSuccessors: return "append-all";
    }
    return "?";
}

DecisionKind decide(double s_alpha, double s_beta, double s_gamma,
                    int alpha_children, int beta_children, double tie_tolerance) {
    if (std::isnan(s_alpha) || std::isnan(s_beta) || std::isnan(s_gamma))
        throw NumericError("NaN entropy");
    if (alpha_children <= 1) return DecisionKind::Pass;  // region is a lone point
    if (beta_children <= 1) return DecisionKind::Pass;
    auto le = [tie_tolerance](double a, double b) { return a <= b + tie_tolerance; };
    if (le(s_alpha, s_beta) && le(s_beta, s_gamma) && s_gamma < kEntropySaturation &&
        s_beta < kBuildInformationGate)
        return DecisionKind::Build;  // entropy falls toward the center
    if (le(s_gamma, s_alpha) && le(s_alpha, s_beta) && s_beta < kEntropySaturation)
        return DecisionKind::AppendSelf;  // the smaller ball may improve
    if (le(s_beta, s_alpha) && le(s_alpha, s_gamma) && s_gamma < kEntropySaturation)
        return DecisionKind::AppendSuccessorsExceptSelf;  // look in the annulus
    if (le(s_beta, s_gamma) && le(s_gamma, s_alpha) && s_alpha < kEntropySaturation)
        return DecisionKind::AppendSuccessorsExceptSelf;
    if (le(s_gamma, s_alpha) && le(s_alpha, s_beta) && s_beta < kEntropySaturation)
        return DecisionKind::Pass;  // unreachable: shadowed by the append-self test above
    if (le(s_gamma, s_beta) && le(s_beta, s_alpha) && s_alpha < kEntropySaturation)
        return DecisionKind::Pass;
    // Some entropy is saturated at 1: not enough information at this scale.
    return DecisionKind::AppendAllSuccessors;
}

RegionTriple gather_regions(const CoverTree& tree, int adult, int level) {
    if (level < 0 || level + 1 > tree.depth())
        throw InputError("gather_regions needs levels up to level+1 built");

    RegionTriple regions;
    regions.alpha = tree.level(level + 1).children[adult];
    regions.beta = tree.level(level).children[adult];
    if (level == 0) {
        regions.gamma = regions.beta;
    } else if (tree.adults()[adult].cohort <= level - 1) {
        regions.gamma = tree.level(level - 1).children[adult];
    } else {
        for (int e : tree.adults()[adult].elders) {
            const auto& kids = tree.level(level - 1).children[e];
            regions.gamma.insert(regions.gamma.end(), kids.begin(), kids.end());
        }
        std::sort(regions.gamma.begin(), regions.gamma.end());
    }
    return regions;
}

namespace {

/// Per-label weights of the three regions, read off the cached level
/// statistics instead of materializing point sets.
struct RegionWeights {
    Vector alpha;
    Vector beta;
    Vector gamma;
};

RegionWeights region_weights(const CoverTree& tree, int adult, int level) {
    RegionWeights w;
    w.alpha = tree.level(level + 1).label_weights.row(adult);
    w.beta = tree.level(level).label_weights.row(adult);
    if (level == 0) {
        w.gamma = w.beta;
    } else if (tree.adults()[adult].cohort <= level - 1) {
        w.gamma = tree.level(level - 1).label_weights.row(adult);
    } else {
        w.gamma = Vector::Zero(tree.num_labels());
        for (int e : tree.adults()[adult].elders)
            w.gamma += tree.level(level - 1).label_weights.row(e);
    }
    return w;
}

std::vector<int> dominant_labels(const Vector& weights) {
    const int l = static_cast<int>(weights.size());
    if (l == 1) return weights[0] > 0.0 ? std::vector<int>{0} : std::vector<int>{};
    const double total = weights.sum();
    std::vector<int> dominant;
    for (int lab = 0; lab < l; ++lab)
        if (weights[lab] * l > total) dominant.push_back(lab);
    std::stable_sort(dominant.begin(), dominant.end(),
                     [&](int a, int b) { return weights[a] > weights[b]; });
    return dominant;
}

double dominant_delta_entropy(const Vector& weights, const std::vector<int>& dominant) {
    Vector restricted = Vector::Zero(weights.size());
    for (int lab : dominant) restricted[lab] = weights[lab];
    const double ds = entropy(weights) - entropy(restricted);
    return std::clamp(ds, 0.0, 1.0);
}

} // namespace

SelectionResult select_regions(PooledPoints pooled, const SelectConfig& config) {
    CoverTreeConfig tree_config;
    tree_config.theta = config.theta;
    tree_config.root_policy = config.root_policy;
    tree_config.max_level = config.max_level;

    SelectionResult result{.events = {}, .tree = CoverTree(std::move(pooled), tree_config),
                           .trace = {}, .stop_level = 0};
    CoverTree& tree = result.tree;

    std::vector<int> candidates = {0};
    int level = 0;
    while (!candidates.empty()) {
        if (!tree.ensure_level(level + 1)) break;
        const CoverTreeLevel& lv = tree.level(level);
        const CoverTreeLevel& lv_next = tree.level(level + 1);

        LevelTrace row{level, lv.adult_count, static_cast<int>(candidates.size()), 0, 0, lv.radius};
        std::vector<int> next_candidates;
        auto append = [&](int a) { next_candidates.push_back(a); };

        for (int ai : candidates) {
            const int alpha_children = static_cast<int>(lv_next.children[ai].size());
            const int beta_children = static_cast<int>(lv.children[ai].size());

            DecisionKind kind;
            if (alpha_children <= 1 || beta_children <= 1) {
                kind = DecisionKind::Pass;
            } else {
                const RegionWeights w = region_weights(tree, ai, level);
                kind = decide(entropy(w.alpha), entropy(w.beta), entropy(w.gamma),
                              alpha_children, beta_children);
                if (kind == DecisionKind::Build) {
                    const std::vector<int> dominant = dominant_labels(w.beta);
                    if (dominant.empty()) {
                        kind = DecisionKind::Pass;  // exact tie across every label
                    } else {
                        BuildEvent event;
                        event.adult = ai;
                        event.level = level;
                        event.radius = lv.radius;
                        event.dominant_labels = dominant;
                        event.region = lv.children[ai];
                        event.s_alpha = entropy(w.alpha);
                        event.s_beta = entropy(w.beta);
                        event.s_gamma = entropy(w.gamma);
                        event.delta_entropy = dominant_delta_entropy(w.beta, dominant);
                        event.label_weights = w.beta;
                        row.builds++;
                        row.coordinates += static_cast<int>(dominant.size());
                        result.events.push_back(std::move(event));
                    }
                }
            }

            if (!config.parsimonious && kind == DecisionKind::Pass)
                kind = DecisionKind::AppendAllSuccessors;

            switch (kind) {
                case DecisionKind::Build:
                case DecisionKind::Pass:
                    break;
                case DecisionKind::AppendSelf:
                    append(ai);
                    break;
                case DecisionKind::AppendSuccessorsExceptSelf:
                    for (int s : lv_next.successors[ai])
                        if (s != ai) append(s);
                    break;
                case DecisionKind::AppendAllSuccessors:
                    for (int s : lv_next.successors[ai]) append(s);
                    break;
            }
        }

        result.trace.push_back(row);
        std::sort(next_candidates.begin(), next_candidates.end());
        next_candidates.erase(std::unique(next_candidates.begin(), next_candidates.end()),
                              next_candidates.end());
        candidates = std::move(next_candidates);
        ++level;
    }
    result.stop_level = level;
    return result;
}

} // namespace cder
