#include <stdexcept>

#include "gfsim/codec.hpp"
#include "gfsim/rx.hpp"

namespace gfsim {

DecodeAttempt attempt_decode(const EqualizedStream& stream, const ResourceConfig& config, int pilot_position,
                             int detected_index) {
    const auto n_sym = stream.soft_symbols.size();
    if (n_sym != config.n_data_re) throw std::invalid_argument("attempt_decode: soft symbol count != n_data_re");

    std::vector<double> llrs(static_cast<std::size_t>(2 * n_sym), 0.0);
    if (stream.post_sinr > 0.0) {
        const double residual_var = std::max(1.0 / stream.post_sinr, 1e-12);
        for (Eigen::Index k = 0; k < n_sym; ++k) {
            const auto [l0, l1] = codec::qpsk_llr(stream.soft_symbols(k), 1.0, residual_var);
            llrs[static_cast<std::size_t>(2 * k)] = l0;
            llrs[static_cast<std::size_t>(2 * k + 1)] = l1;
        }
    }

    DecodeAttempt out;
    const auto decoded = codec::fec_decode(llrs, static_cast<std::size_t>(config.n_info_bits()));
    if (!decoded.crc_ok) {
        out.status = DecodeStatus::CrcFailure;
        return out;
    }
    const auto codeword = codec::fec_encode(decoded.bits, static_cast<std::size_t>(config.n_coded_bits()));
    out.selection = select_pilots_from_codeword(codeword, config.layout);
    out.payload.assign(decoded.bits.begin(), decoded.bits.begin() + config.transport_block_size);
    const bool consistent = pilot_position < 0 ||
                            out.selection.indices.at(static_cast<std::size_t>(pilot_position)) == detected_index;
    out.status = consistent ? DecodeStatus::Decoded : DecodeStatus::PilotMismatch;
    return out;
}

void cancel_user(RxGrid& grid, const UeTransmission& reconstructed, const ChannelEstimate& h_tilde) {
    if (h_tilde.gains.size() != grid.n_rx()) throw std::invalid_argument("cancel_user: estimate size != n_rx");
    CMatrix gains(grid.n_rx(), grid.w() + 1);
    gains.colwise() = h_tilde.gains;
    cancel_user(grid, reconstructed, gains);
}

void cancel_user(RxGrid& grid, const UeTransmission& reconstructed, const CMatrix& block_gains) {
    const int w = grid.w();
    if (block_gains.rows() != grid.n_rx() || block_gains.cols() != w + 1)
        throw std::invalid_argument("cancel_user: gain matrix shape");
    if (static_cast<int>(reconstructed.pilot_symbols.size()) != w ||
        reconstructed.data_symbols.size() != grid.data_block.rows())
        throw std::invalid_argument("cancel_user: reconstruction does not match the grid");
    for (int b = 0; b < w; ++b) {
        auto& blk = grid.pilot_blocks[static_cast<std::size_t>(b)];
        const auto& z = reconstructed.pilot_symbols[static_cast<std::size_t>(b)];
        if (z.size() != blk.rows()) throw std::invalid_argument("cancel_user: pilot block length");
        blk.noalias() -= z * block_gains.col(b).transpose();
    }
    grid.data_block.noalias() -= reconstructed.data_symbols * block_gains.col(w).transpose();
}

namespace {

// Solves min ||Y - D H|| for H (Q x n_rx); nullopt if D lacks full column rank.
std::optional<CMatrix> least_squares(const CMatrix& d, const CMatrix& y) {
    const CMatrix gram = d.adjoint() * d;
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    if (ev.size() == 0 || ev.maxCoeff() <= 0.0 || ev.minCoeff() <= 1e-10 * ev.maxCoeff()) return std::nullopt;
    return CMatrix(gram.llt().solve(d.adjoint() * y));
}

} // namespace

std::optional<std::vector<CMatrix>> data_aided_ce(const RxGrid& original, std::span<const UeTransmission> users,
                                                  ChannelMode mode) {
    if (users.empty()) return std::nullopt;
    const int w = original.w();
    const int n_rx = original.n_rx();
    const auto q_count = static_cast<Eigen::Index>(users.size());

    auto block_symbols = [&](const UeTransmission& u, int b) -> const CVector& {
        return b == w ? u.data_symbols : u.pilot_symbols[static_cast<std::size_t>(b)];
    };
    for (const auto& u : users) {
        if (static_cast<int>(u.pilot_symbols.size()) != w || u.data_symbols.size() != original.data_block.rows())
            throw std::invalid_argument("data_aided_ce: reconstruction does not match the grid");
    }

    auto solve_blocks = [&](std::span<const int> blocks) -> std::optional<CMatrix> {
        Eigen::Index rows = 0;
        for (int b : blocks) rows += original.block(b).rows();
        CMatrix d(rows, q_count);
        CMatrix y(rows, n_rx);
        Eigen::Index r0 = 0;
        for (int b : blocks) {
            const auto len = original.block(b).rows();
            y.middleRows(r0, len) = original.block(b);
            for (Eigen::Index q = 0; q < q_count; ++q) d.col(q).segment(r0, len) = block_symbols(users[q], b);
            r0 += len;
        }
        return least_squares(d, y);
    };

    std::vector<CMatrix> out(users.size(), CMatrix(n_rx, w + 1));
    if (mode == ChannelMode::Flat) {
        std::vector<int> all(static_cast<std::size_t>(w + 1));
        for (int b = 0; b <= w; ++b) all[static_cast<std::size_t>(b)] = b;
        const auto h = solve_blocks(all);
        if (!h) return std::nullopt;
        for (Eigen::Index q = 0; q < q_count; ++q) out[q].colwise() = h->row(q).transpose();
        return out;
    }

    const int data_only[] = {w};
    const auto h_data = solve_blocks(data_only);
    if (!h_data) return std::nullopt;
    for (int b = 0; b <= w; ++b) {
        std::optional<CMatrix> h_block;
        if (b < w) {
            const int one[] = {b};
            h_block = solve_blocks(one);
        }
        // collided pilot blocks fall back to the data-block estimate
        const CMatrix& h = h_block ? *h_block : *h_data;
        for (Eigen::Index q = 0; q < q_count; ++q) out[q].col(b) = h.row(q).transpose();
    }
    return out;
}

} // namespace gfsim
