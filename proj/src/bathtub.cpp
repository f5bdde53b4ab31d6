#include "thresholdopt/bathtub.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace thresholdopt {

namespace {

// total order: value descending, then cell index ascending
struct ByValueDesc {
    const std::vector<double>& q;
    bool operator()(int a, int b) const {
        if (q[a] != q[b]) return q[a] > q[b];
        return a < b;
    }
};

}  // namespace

ThresholdResult find_threshold(const ScalarField& q, double v0, ThresholdMode mode) {
    if (!(v0 > 0.0 && v0 < 1.0)) throw std::invalid_argument("find_threshold: V0 must be in (0,1)");
    const int N = q.size();
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    const ByValueDesc comp{q.values};

    const double target = v0 * N;
    const int K = static_cast<int>(std::llround(target));
    // rank whose value defines the level: round(target) in binary mode,
    // ceil(target) in fractional mode (keeps every tie share inside [0,1])
    const int rank = mode == ThresholdMode::strict_binary
                         ? K
                         : std::max(1, static_cast<int>(std::ceil(target)));

    double level;
    if (rank <= 0) {
        level = *std::max_element(q.values.begin(), q.values.end());
    } else {
        std::nth_element(idx.begin(), idx.begin() + (rank - 1), idx.end(), comp);
        level = q[idx[rank - 1]];
    }

    std::vector<int> ties;
    int n_above = 0;
    for (int k = 0; k < N; ++k) {
        if (q[k] > level) ++n_above;
        else if (q[k] == level) ties.push_back(k);
    }
    if (static_cast<double>(ties.size()) > 0.01 * N)
        std::clog << "[thresholdopt] warning: " << ties.size() << " of " << N
                  << " cells lie exactly at the threshold level (flat switch function?)\n";

    std::vector<double> ind(N, 0.0);
    double achieved;
    if (mode == ThresholdMode::strict_binary) {
        for (int k = 0; k < N; ++k)
            if (q[k] > level) ind[k] = 1.0;
        // fill the remaining K - n_above slots from the tie set, lowest index first
        int remaining = K - n_above;
        for (int cell : ties) {
            if (remaining <= 0) break;
            ind[cell] = 1.0;
            --remaining;
        }
        achieved = static_cast<double>(K) / N;
    } else {
        for (int k = 0; k < N; ++k)
            if (q[k] > level) ind[k] = 1.0;
        const double residual = target - n_above;  // in cells
        const double share = ties.empty() ? 0.0 : residual / ties.size();
        for (int cell : ties) ind[cell] = share;
        achieved = (n_above + residual) / N;
    }

    ThresholdResult out{level, ControlField(q.grid, std::move(ind), v0), std::move(ties), achieved,
                        mode};
    return out;
}

OracleResult bathtub_oracle(const ScalarField& q, double v0) {
    const int N = q.size();
    if (N > 20) throw std::invalid_argument("bathtub_oracle: grid above oracle scale (20 cells)");
    if (!(v0 > 0.0 && v0 < 1.0)) throw std::invalid_argument("bathtub_oracle: V0 must be in (0,1)");
    const double hd = q.grid->cell_measure();
    const int K = static_cast<int>(std::llround(v0 * N));

    OracleResult out;
    // exhaustive enumeration over all K-subsets
    std::vector<char> pick(N, 0);
    std::fill(pick.begin(), pick.begin() + K, 1);
    double best = -std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int k = 0; k < N; ++k)
            if (pick[k]) s += q[k];
        best = std::max(best, s);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    out.binary_optimum = best * hd;

    // fractional LP optimum: fill the exact volume v0*N greedily by value
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), ByValueDesc{q.values});
    double capacity = v0 * N, s = 0.0;
    for (int k : idx) {
        const double take = std::min(1.0, capacity);
        if (take <= 0.0) break;
        s += take * q[k];
        capacity -= take;
    }
    out.fractional_optimum = s * hd;
    return out;
}

GapResult quantitative_gap(const ScalarField& q, const ControlField& f,
                           const ThresholdResult& best) {
    if (!same_grid(q.grid, f.grid) || !same_grid(q.grid, best.indicator.grid))
        throw std::invalid_argument("quantitative_gap: mismatched grids");
    GapResult out;
    out.gap = integrate(q, best.indicator) - integrate(q, f);
    out.l1 = l1_distance(f, best.indicator);
    out.ratio = out.l1 > 0.0 ? out.gap / (out.l1 * out.l1)
                             : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace thresholdopt
