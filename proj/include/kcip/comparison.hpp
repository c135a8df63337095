#pragma once

#include <Eigen/Dense>
#include <map>
#include <tuple>
#include <vector>

#include "kcip/kernels.hpp"

namespace kcip {

// A flow path through Q's state space Theta: indices with front() = source
// and back() = sink, weight F[gamma] within its ordered endpoint pair.
struct FlowPath {
    std::vector<int> states;
    double weight = 0.0;

    int source() const { return states.front(); }
    int sink() const { return states.back(); }
    int length() const { return static_cast<int>(states.size()) - 1; }  // k[gamma]
};

struct Flow {
    std::map<std::pair<int, int>, std::vector<FlowPath>> paths;

    void add(FlowPath p) { paths[{p.source(), p.sink()}].push_back(std::move(p)); }
};

// Extension data when K lives on a strictly larger space Theta-hat:
// theta_to_hat embeds Q's states; px gives the extension law P_x over Theta
// for each hat state outside the embedding; pxy gives couplings over
// Theta x Theta for K-edges between outside states.
struct ExtensionSpec {
    std::vector<int> theta_to_hat;
    std::map<int, std::vector<std::pair<int, double>>> px;
    std::map<std::pair<int, int>, std::vector<std::tuple<int, int, double>>> pxy;
};

struct ComparisonResult {
    double constant = 0.0;  // the certificate A with E_K(fhat) <= A E_Q(f)
    std::pair<int, int> argmax_edge{-1, -1};
    std::size_t needed_pairs = 0;
    std::size_t fallback_pairs = 0;  // filled by flow builders, echoed here
};

// The three-term comparison constant
//   A = sup_{Q(q,r)>0} 1/(Q(q,r) nu(q)) [ sum_{gamma ni (q,r)} F k K(i,o) mu(i)
//       + 2 sum_gamma k F sum_{y notin Theta} P_y[o] K(i,y) mu(i)
//       + sum_gamma k F sum_{K-edges x,y notin Theta} P_xy[i,o] K(x,y) mu(x) ].
// With ext = nullptr (Theta = Theta-hat) the last two terms vanish and the
// classical single-term constant results. Validates that the flow covers
// every required ordered pair with weights summing to 1 and Q-positive steps.
ComparisonResult comparison_constant(const KernelMatrix& K, const KernelMatrix& Q,
                                     const Flow& flow, const ExtensionSpec* ext = nullptr);

// fhat = f on the embedded states, fhat(x) = sum_y P_x[y] f(y) outside.
Eigen::VectorXd linear_extension(const Eigen::VectorXd& f, int hat_size,
                                 const ExtensionSpec& ext);

}  // namespace kcip
