#include <algorithm>
#include <stdexcept>

#include "gfsim/rx.hpp"

namespace gfsim {

namespace {

// Column s of the MMSE filter (H H^H + s2 I)^{-1} H, evaluated in whichever
// dimension is smaller.
CMatrix mmse_filter(const CMatrix& h, double noise_var) {
    const auto n_rx = h.rows();
    const auto n_users = h.cols();
    if (noise_var < 0.0) throw std::invalid_argument("mmse_equalize: negative noise variance");
    if (noise_var == 0.0 && n_users > n_rx)
        throw std::invalid_argument("mmse_equalize: more users than antennas without noise is ill-posed");
    if (n_users <= n_rx) {
        // H (H^H H + s2 I)^{-1}
        const CMatrix gram = h.adjoint() * h + noise_var * CMatrix::Identity(n_users, n_users);
        const Eigen::FullPivLU<CMatrix> lu(gram);
        if (!lu.isInvertible()) throw std::invalid_argument("mmse_equalize: singular channel matrix");
        return h * lu.inverse();
    }
    const CMatrix cov = h * h.adjoint() + noise_var * CMatrix::Identity(n_rx, n_rx);
    return cov.ldlt().solve(h);
}

CMatrix stack_estimates(std::span<const ChannelEstimate> estimates, Eigen::Index n_rx) {
    CMatrix h(n_rx, static_cast<Eigen::Index>(estimates.size()));
    for (std::size_t s = 0; s < estimates.size(); ++s) {
        if (estimates[s].gains.size() != n_rx) throw std::invalid_argument("mmse_equalize: estimate size != n_rx");
        h.col(static_cast<Eigen::Index>(s)) = estimates[s].gains;
    }
    return h;
}

EqualizedStream stream_for(const CMatrix& data_block, const CMatrix& filter, const CMatrix& h, Eigen::Index s) {
    EqualizedStream out;
    const auto w = filter.col(s);
    const double mu = std::clamp(w.dot(h.col(s)).real(), 0.0, 1.0 - 1e-12);
    out.effective_gain = mu;
    if (mu <= 0.0) {
        out.soft_symbols = CVector::Zero(data_block.rows());
        out.post_sinr = 0.0;
        return out;
    }
    out.soft_symbols = (data_block * w.conjugate()) / mu;
    out.post_sinr = mu / (1.0 - mu);
    return out;
}

} // namespace

std::vector<EqualizedStream> mmse_equalize(const CMatrix& data_block, std::span<const ChannelEstimate> estimates,
                                           double noise_var) {
    if (estimates.empty()) throw std::invalid_argument("mmse_equalize: no estimates");
    const CMatrix h = stack_estimates(estimates, data_block.cols());
    const CMatrix filter = mmse_filter(h, noise_var);
    std::vector<EqualizedStream> out;
    out.reserve(estimates.size());
    for (Eigen::Index s = 0; s < h.cols(); ++s) out.push_back(stream_for(data_block, filter, h, s));
    return out;
}

EqualizedStream mmse_equalize_user(const CMatrix& data_block, std::span<const ChannelEstimate> estimates,
                                   double noise_var, std::size_t user) {
    if (user >= estimates.size()) throw std::invalid_argument("mmse_equalize_user: user out of range");
    const CMatrix h = stack_estimates(estimates, data_block.cols());
    const CMatrix filter = mmse_filter(h, noise_var);
    return stream_for(data_block, filter, h, static_cast<Eigen::Index>(user));
}

} // namespace gfsim
