#include "kcip/comparison.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace kcip {

namespace {

struct PairNeed {
    double k_term = 0.0;    // K(i,o) mu(i) for this ordered pair (term 1)
    double ext_in = 0.0;    // 2 sum_y P_y[o] K(i,y) mu(i)        (term 2)
    double ext_out = 0.0;   // sum_{K-edges outside} P_xy[i,o] K(x,y) mu(x) (term 3)
};

}  // namespace

ComparisonResult comparison_constant(const KernelMatrix& K, const KernelMatrix& Q,
                                     const Flow& flow, const ExtensionSpec* ext) {
    int mhat = K.size();
    int mth = Q.size();
    if (K.pi.size() != mhat || Q.pi.size() != mth)
        throw std::invalid_argument("comparison needs stationary laws on both kernels");

    std::vector<int> to_hat(mth);
    if (ext) {
        if (static_cast<int>(ext->theta_to_hat.size()) != mth)
            throw std::invalid_argument("embedding size mismatch");
        to_hat = ext->theta_to_hat;
    } else {
        if (mhat != mth) throw std::invalid_argument("equal spaces require equal sizes");
        for (int i = 0; i < mth; ++i) to_hat[i] = i;
    }
    std::vector<char> is_embedded(mhat, 0);
    for (int h : to_hat) is_embedded[h] = 1;

    // per ordered pair (a,b) in Theta: the mass each of the three terms
    // attaches to every path of that pair
    std::map<std::pair<int, int>, PairNeed> need;
    for (int a = 0; a < mth; ++a)
        for (int b = 0; b < mth; ++b) {
            if (a == b) continue;
            double k1 = K.P(to_hat[a], to_hat[b]) * K.pi[to_hat[a]];
            if (k1 > 0.0) need[{a, b}].k_term = k1;
        }
    if (ext) {
        for (const auto& [y, dist] : ext->px) {
            if (is_embedded[y]) throw std::invalid_argument("extension law given for embedded state");
            for (int a = 0; a < mth; ++a) {
                double kay = K.P(to_hat[a], y);
                if (kay <= 0.0) continue;
                for (const auto& [b, pb] : dist) {
                    if (b == a || pb <= 0.0) continue;
                    need[{a, b}].ext_in += 2.0 * pb * kay * K.pi[to_hat[a]];
                }
            }
        }
        for (const auto& [edge, coupling] : ext->pxy) {
            auto [x, y] = edge;
            if (is_embedded[x] || is_embedded[y])
                throw std::invalid_argument("coupling given for embedded state");
            double kxy = K.P(x, y);
            if (kxy <= 0.0) continue;
            for (const auto& [a, b, pab] : coupling) {
                if (a == b || pab <= 0.0) continue;
                need[{a, b}].ext_out += pab * kxy * K.pi[x];
            }
        }
    }

    // accumulate directed-edge loads over the flow, validating as we go
    std::map<std::pair<int, int>, double> load;
    for (const auto& [pair, plist] : flow.paths) {
        double wsum = 0.0;
        for (const FlowPath& g : plist) {
            if (g.states.size() < 2) throw std::invalid_argument("degenerate flow path");
            if (g.source() != pair.first || g.sink() != pair.second)
                throw std::invalid_argument("flow path filed under the wrong pair");
            wsum += g.weight;
            for (std::size_t s = 0; s + 1 < g.states.size(); ++s)
                if (Q.P(g.states[s], g.states[s + 1]) <= 0.0)
                    throw std::invalid_argument("flow path uses a null Q edge");
        }
        auto it = need.find(pair);
        if (it == need.end()) continue;  // superfluous pair, contributes nothing
        if (std::abs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("flow weights for a pair do not sum to 1");
        double mass = it->second.k_term + it->second.ext_in + it->second.ext_out;
        for (const FlowPath& g : plist) {
            double contrib = g.weight * g.length() * mass;
            for (std::size_t s = 0; s + 1 < g.states.size(); ++s)
                load[{g.states[s], g.states[s + 1]}] += contrib;
        }
    }
    for (const auto& [pair, pn] : need) {
        (void)pn;
        if (flow.paths.find(pair) == flow.paths.end())
            throw std::invalid_argument("flow misses a required ordered pair");
    }

    ComparisonResult res;
    res.needed_pairs = need.size();
    for (const auto& [e, l] : load) {
        double denom = Q.P(e.first, e.second) * Q.pi[e.first];
        double val = l / denom;
        if (val > res.constant) {
            res.constant = val;
            res.argmax_edge = e;
        }
    }
    return res;
}

Eigen::VectorXd linear_extension(const Eigen::VectorXd& f, int hat_size,
                                 const ExtensionSpec& ext) {
    Eigen::VectorXd fhat = Eigen::VectorXd::Zero(hat_size);
    std::vector<char> set(hat_size, 0);
    for (int a = 0; a < static_cast<int>(ext.theta_to_hat.size()); ++a) {
        fhat[ext.theta_to_hat[a]] = f[a];
        set[ext.theta_to_hat[a]] = 1;
    }
    for (const auto& [x, dist] : ext.px) {
        double v = 0.0, tot = 0.0;
        for (const auto& [b, pb] : dist) {
            v += pb * f[b];
            tot += pb;
        }
        if (std::abs(tot - 1.0) > 1e-9)
            throw std::invalid_argument("extension law does not sum to 1");
        fhat[x] = v;
        set[x] = 1;
    }
    for (int h = 0; h < hat_size; ++h)
        if (!set[h]) throw std::invalid_argument("state outside Theta lacks an extension law");
    return fhat;
}

}  // namespace kcip
