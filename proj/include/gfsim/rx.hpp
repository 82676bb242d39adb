#pragma once

#include <optional>
#include <span>

#include "gfsim/channel.hpp"
#include "gfsim/pilots.hpp"
#include "gfsim/tx.hpp"
#include "gfsim/types.hpp"

namespace gfsim {

/// Activity threshold multiplier: the 1 - 1e-3 quantile of the noise-only
/// detection metric over two antennas (a sum of two unit-mean exponentials),
/// i.e. the root of exp(-g) * (1 + g) = 1e-3.
inline constexpr double kDefaultAudGamma = 9.233413476451586;

enum class EstimateSource { PilotCorrelation, DataAided };

struct ChannelEstimate {
    CVector gains; ///< one complex gain per receive antenna
    EstimateSource source = EstimateSource::PilotCorrelation;
    int source_pilot = 0;
};

struct Detection {
    int pilot_index = 0;
    ChannelEstimate estimate;
    double metric = 0.0; ///< sum over antennas of |h_hat|^2
};

struct DetectionRound {
    int pilot_position = 0;
    std::vector<Detection> detected;
    double threshold_used = 0.0;
};

enum class RxProcedure { Serial, Parallel };
enum class IcEstimation { PilotOnly, DataAided };
enum class DuplicatePolicy { StrongerPilot, Average };
/// Which pilot estimate pilot-only IC cancels a decoded UE with.
enum class IcPilotChoice {
    Detecting, ///< the estimate of the detection that led to the decode
    BestFit,   ///< among the UE's w re-correlated pilots and the detecting one,
               ///< the estimate closest to the decoded data block
};

struct RxOptions {
    RxProcedure procedure = RxProcedure::Serial;
    IcEstimation ic_ce_mode = IcEstimation::PilotOnly;
    double aud_gamma = kDefaultAudGamma;
    int max_rounds = 10;
    DuplicatePolicy duplicate_policy = DuplicatePolicy::StrongerPilot;
    IcPilotChoice ic_pilot_choice = IcPilotChoice::BestFit;
    /// Fading model the receiver assumes when reusing estimates across blocks.
    ChannelMode channel_mode = ChannelMode::Flat;

    void validate() const;
};

struct EqualizedStream {
    CVector soft_symbols;        ///< bias-corrected: soft = s + e
    double effective_gain = 0.0; ///< mu = w^H h before bias correction
    double post_sinr = 0.0;      ///< mu / (1 - mu)
};

enum class DecodeStatus { Decoded, CrcFailure, PilotMismatch };

struct DecodeAttempt {
    DecodeStatus status = DecodeStatus::CrcFailure;
    Bits payload;
    PilotSelection selection;
    [[nodiscard]] bool success() const { return status == DecodeStatus::Decoded; }
};

struct DecodedUser {
    Bits payload;
    PilotSelection selection;
    int round = 0;          ///< receiver iteration (all pilot positions once)
    int pass = 0;           ///< blind detection pass; serial mode runs w passes per round
    int pilot_position = 0; ///< block whose detection led to the decode
    int pilot_index = 0;
    double metric = 0.0;
    ChannelEstimate estimate; ///< estimate used for the (latest) cancellation
};

struct AudEvents {
    int detections = 0;
    int crc_failures = 0;
    int pilot_mismatches = 0;
    int duplicates = 0; ///< CRC-valid decodes of an already decoded payload
};

struct DecodeReport {
    std::vector<DecodedUser> decoded;
    int decode_attempts = 0;
    int rounds_run = 0;
    int passes_run = 0;
    AudEvents aud;
    /// Indices detected on each pilot block of the received grid, before any cancellation.
    std::vector<std::vector<int>> initial_detections;
};

/// Correlates every pool sequence with the block (per antenna), normalises
/// to a channel estimate, and keeps candidates whose metric reaches
/// gamma * noise_var / E_seq, E_seq = pilot_power * length.
DetectionRound detect_active_pilots(const CMatrix& pilot_block, const PilotPool& pool, double noise_var, double gamma,
                                    double pilot_power = 1.0, int pilot_position = 0);

std::vector<EqualizedStream> mmse_equalize(const CMatrix& data_block, std::span<const ChannelEstimate> estimates,
                                           double noise_var);

/// Stream of a single user from the same joint filter.
EqualizedStream mmse_equalize_user(const CMatrix& data_block, std::span<const ChannelEstimate> estimates,
                                   double noise_var, std::size_t user);

/// Demaps with residual variance 1/post_sinr, decodes, and on CRC success
/// re-derives the pilot selection from the re-encoded codeword. A negative
/// pilot_position skips the consistency check against detected_index.
DecodeAttempt attempt_decode(const EqualizedStream& stream, const ResourceConfig& config, int pilot_position,
                             int detected_index);

/// Subtracts one user's reconstructed pilots and data. Not idempotent.
void cancel_user(RxGrid& grid, const UeTransmission& reconstructed, const ChannelEstimate& h_tilde);

/// Same with a separate gain per block: n_rx x (w + 1), last column for data.
void cancel_user(RxGrid& grid, const UeTransmission& reconstructed, const CMatrix& block_gains);

/// Least-squares re-estimation from the full symbol vectors of decoded users
/// over the original grid. Returns one n_rx x (w + 1) gain matrix per user,
/// or nullopt when the stacked symbol matrix is rank deficient.
std::optional<std::vector<CMatrix>> data_aided_ce(const RxGrid& original, std::span<const UeTransmission> users,
                                                  ChannelMode mode = ChannelMode::Flat);

DecodeReport run_receiver(const RxGrid& grid, const ResourceConfig& config, const PilotPool& pool,
                          const RxOptions& options);

} // namespace gfsim
