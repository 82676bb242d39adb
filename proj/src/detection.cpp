#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfsim/rx.hpp"

namespace gfsim {

DetectionRound detect_active_pilots(const CMatrix& pilot_block, const PilotPool& pool, double noise_var, double gamma,
                                    double pilot_power, int pilot_position) {
    const auto length = static_cast<Eigen::Index>(pool.length);
    if (pilot_block.rows() != length) throw std::invalid_argument("detect_active_pilots: block length != pool length");
    if (pilot_power <= 0.0) throw std::invalid_argument("detect_active_pilots: pilot power must be positive");

    const double e_seq = pilot_power * static_cast<double>(length);
    // z^H y / z^H z with z = sqrt(P) z0
    const CMatrix estimates = (pool.matrix.adjoint() * pilot_block) / (std::sqrt(pilot_power) * static_cast<double>(length));
    const Eigen::VectorXd metrics = estimates.rowwise().squaredNorm();

    DetectionRound round;
    round.pilot_position = pilot_position;
    // The relative floor only matters for noiseless grids, where DFT leakage
    // would otherwise clear a zero threshold.
    round.threshold_used = std::max(gamma * noise_var / e_seq, 1e-12 * metrics.maxCoeff());
    for (Eigen::Index x = 0; x < length; ++x) {
        if (metrics(x) < round.threshold_used || metrics(x) <= 0.0) continue;
        Detection d;
        d.pilot_index = static_cast<int>(x);
        d.metric = metrics(x);
        d.estimate.gains = estimates.row(x).transpose();
        d.estimate.source = EstimateSource::PilotCorrelation;
        d.estimate.source_pilot = pilot_position;
        round.detected.push_back(std::move(d));
    }
    return round;
}

} // namespace gfsim
