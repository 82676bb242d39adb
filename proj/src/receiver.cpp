#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "gfsim/rx.hpp"

namespace gfsim {

void RxOptions::validate() const {
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
    if (!(aud_gamma > 0.0)) throw std::invalid_argument("aud_gamma must be positive");
}

namespace {

struct Candidate {
    DecodeAttempt attempt;
    int position = 0;
    Detection detection;
};

class Receiver {
public:
    Receiver(const RxGrid& grid, const ResourceConfig& config, const PilotPool& pool, const RxOptions& options)
        : original_(grid), config_(config), pool_(pool), options_(options), work_(grid) {}

    DecodeReport run() {
        record_initial_detections();
        for (int round = 1; round <= options_.max_rounds; ++round) {
            report_.rounds_run = round;
            const bool progress = options_.procedure == RxProcedure::Serial ? serial_round(round) : parallel_round(round);
            if (!progress) break;
        }
        return std::move(report_);
    }

private:
    int w() const { return config_.layout.w; }
    double noise_var() const { return original_.noise_var; }

    DetectionRound detect(int position) {
        auto det = detect_active_pilots(work_.pilot_blocks[static_cast<std::size_t>(position)], pool_, noise_var(),
                                        options_.aud_gamma, config_.pilot_power(), position);
        std::stable_sort(det.detected.begin(), det.detected.end(),
                         [](const Detection& a, const Detection& b) { return a.metric > b.metric; });
        report_.aud.detections += static_cast<int>(det.detected.size());
        return det;
    }

    void record_initial_detections() {
        report_.initial_detections.resize(static_cast<std::size_t>(w()));
        for (int p = 0; p < w(); ++p) {
            const auto det = detect_active_pilots(original_.pilot_blocks[static_cast<std::size_t>(p)], pool_, noise_var(),
                                                  options_.aud_gamma, config_.pilot_power(), p);
            for (const auto& d : det.detected) report_.initial_detections[static_cast<std::size_t>(p)].push_back(d.pilot_index);
        }
    }

    DecodeAttempt try_decode(std::span<const ChannelEstimate> joint, std::size_t user, int position, int index) {
        const auto stream = mmse_equalize_user(work_.data_block, joint, noise_var(), user);
        ++report_.decode_attempts;
        auto attempt = attempt_decode(stream, config_, position, index);
        if (attempt.status == DecodeStatus::CrcFailure) ++report_.aud.crc_failures;
        if (attempt.status == DecodeStatus::PilotMismatch) ++report_.aud.pilot_mismatches;
        return attempt;
    }

    int find_decoded(const Bits& payload) const {
        for (std::size_t i = 0; i < report_.decoded.size(); ++i)
            if (report_.decoded[i].payload == payload) return static_cast<int>(i);
        return -1;
    }

    // Pilot correlation of decoded user `tx` on block b of the working grid.
    CVector recorrelate(const UeTransmission& tx, int b) const {
        const auto& z = tx.pilot_symbols[static_cast<std::size_t>(b)];
        return (work_.pilot_blocks[static_cast<std::size_t>(b)].adjoint() * z).conjugate() / z.squaredNorm();
    }

    // Picks the cancellation estimate for pilot-only IC.
    ChannelEstimate choose_pilot_estimate(const UeTransmission& tx, const ChannelEstimate& est) const {
        if (options_.ic_pilot_choice == IcPilotChoice::Detecting) return est;
        const auto& s = tx.data_symbols;
        const CVector fit = (work_.data_block.transpose() * s.conjugate()) / s.squaredNorm();
        ChannelEstimate best = est;
        double best_dist = (est.gains - fit).squaredNorm();
        for (int b = 0; b < w(); ++b) {
            CVector g = recorrelate(tx, b);
            const double dist = (g - fit).squaredNorm();
            if (dist < best_dist) {
                best_dist = dist;
                best.gains = std::move(g);
                best.source = EstimateSource::PilotCorrelation;
                best.source_pilot = b;
            }
        }
        return best;
    }

    // Cancellation gains from a pilot estimate. Flat channels reuse it on every
    // block; per-block channels re-correlate the pilot blocks.
    CMatrix pilot_gains(const UeTransmission& tx, const ChannelEstimate& est, int position) const {
        CMatrix gains(config_.n_rx, w() + 1);
        gains.colwise() = est.gains;
        if (options_.channel_mode == ChannelMode::PerBlock) {
            for (int b = 0; b < w(); ++b)
                if (b != position || options_.ic_pilot_choice == IcPilotChoice::BestFit) gains.col(b) = recorrelate(tx, b);
        }
        return gains;
    }

    // Pilot-only cancellation of decoded user q; records the estimate used.
    void cancel_pilot_only(std::size_t q, const ChannelEstimate& est, int position) {
        const auto chosen = choose_pilot_estimate(reconstructions_[q], est);
        cancel_increment(q, pilot_gains(reconstructions_[q], chosen, position));
        report_.decoded[q].estimate = chosen;
    }

    // Re-chooses the estimate of every earlier user against a grid holding
    // only that user, since later cancellations may have cleared its pilots.
    void refresh_pilot_only(std::size_t newest) {
        if (options_.ic_pilot_choice != IcPilotChoice::BestFit) return;
        for (std::size_t q = 0; q < newest; ++q) {
            const CMatrix old = cancel_gains_[q];
            cancel_increment(q, -old);
            auto& user = report_.decoded[q];
            const auto chosen = choose_pilot_estimate(reconstructions_[q], user.estimate);
            cancel_increment(q, pilot_gains(reconstructions_[q], chosen, user.pilot_position));
            user.estimate = chosen;
        }
    }

    void add_user(const DecodeAttempt& attempt, const Detection& det, const ChannelEstimate& est, int position,
                  int round, int pass) {
        DecodedUser user;
        user.payload = attempt.payload;
        user.selection = attempt.selection;
        user.round = round;
        user.pass = pass;
        user.pilot_position = position;
        user.pilot_index = det.pilot_index;
        user.metric = det.metric;
        user.estimate = est;
        report_.decoded.push_back(std::move(user));
        reconstructions_.push_back(build_ue_transmission(0, attempt.payload, config_, pool_));
        reconstructions_.back().ue_id = static_cast<int>(reconstructions_.size()) - 1;
        cancel_gains_.emplace_back(CMatrix::Zero(config_.n_rx, w() + 1));
    }

    // Subtracts `gains` for decoded user q from the working grid.
    void cancel_increment(std::size_t q, const CMatrix& gains) {
        cancel_user(work_, reconstructions_[q], gains);
        cancel_gains_[q] += gains;
    }

    // Rebuilds the working grid from the original using least-squares
    // estimates of every decoded user. Returns false if LS is unavailable.
    bool recancel_data_aided() {
        const auto refined = data_aided_ce(original_, reconstructions_, options_.channel_mode);
        if (!refined) return false;
        work_ = original_;
        for (std::size_t q = 0; q < reconstructions_.size(); ++q) {
            cancel_gains_[q] = (*refined)[q];
            cancel_user(work_, reconstructions_[q], cancel_gains_[q]);
            auto& est = report_.decoded[q].estimate;
            est.gains = cancel_gains_[q].col(w());
            est.source = EstimateSource::DataAided;
        }
        return true;
    }

    // Cancellation for a freshly decoded user (index q in the decoded list).
    void cancel_new_user(std::size_t q, const ChannelEstimate& est, int position) {
        if (options_.ic_ce_mode == IcEstimation::DataAided && recancel_data_aided()) return;
        cancel_pilot_only(q, est, position);
        refresh_pilot_only(q);
    }

    // A CRC-valid decode of a payload that is already cancelled: the detection
    // saw that user's cancellation residual. Pilot-only IC subtracts the
    // residual estimate; data-aided IC already re-fits it from the original grid.
    void handle_duplicate(std::size_t q, const ChannelEstimate& residual, int position) {
        ++report_.aud.duplicates;
        if (options_.ic_ce_mode == IcEstimation::PilotOnly) {
            const auto chosen = choose_pilot_estimate(reconstructions_[q], residual);
            cancel_increment(q, pilot_gains(reconstructions_[q], chosen, position));
        }
    }

    bool serial_round(int round) {
        bool progress = false;
        for (int p = 0; p < w(); ++p) {
            const int pass = ++report_.passes_run;
            const auto det = detect(p);
            std::vector<bool> alive(det.detected.size(), true);
            std::vector<ChannelEstimate> joint;
            for (std::size_t i = 0; i < det.detected.size(); ++i) {
                joint.clear();
                std::size_t me = 0;
                for (std::size_t j = 0; j < det.detected.size(); ++j) {
                    if (!alive[j]) continue;
                    if (j == i) me = joint.size();
                    joint.push_back(det.detected[j].estimate);
                }
                const auto& d = det.detected[i];
                const auto attempt = try_decode(joint, me, p, d.pilot_index);
                if (!attempt.success()) continue;
                alive[i] = false;
                const int existing = find_decoded(attempt.payload);
                if (existing >= 0) {
                    handle_duplicate(static_cast<std::size_t>(existing), d.estimate, p);
                    continue;
                }
                add_user(attempt, d, d.estimate, p, round, pass);
                cancel_new_user(report_.decoded.size() - 1, d.estimate, p);
                progress = true;
            }
        }
        return progress;
    }

    bool parallel_round(int round) {
        const int pass = ++report_.passes_run;
        std::vector<Candidate> candidates;
        for (int p = 0; p < w(); ++p) {
            const auto det = detect(p);
            std::vector<ChannelEstimate> joint;
            joint.reserve(det.detected.size());
            for (const auto& d : det.detected) joint.push_back(d.estimate);
            for (std::size_t i = 0; i < det.detected.size(); ++i) {
                auto attempt = try_decode(joint, i, p, det.detected[i].pilot_index);
                if (attempt.success()) candidates.push_back({std::move(attempt), p, det.detected[i]});
            }
        }

        // group decodes of the same payload, in order of first appearance
        std::vector<std::vector<std::size_t>> groups;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
                return candidates[g.front()].attempt.payload == candidates[c].attempt.payload;
            });
            if (it == groups.end())
                groups.push_back({c});
            else
                it->push_back(c);
        }

        bool progress = false;
        std::vector<std::pair<std::size_t, std::pair<ChannelEstimate, int>>> fresh;
        for (const auto& g : groups) {
            const auto strongest = *std::max_element(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
                return candidates[a].detection.metric < candidates[b].detection.metric;
            });
            const Candidate& lead = candidates[strongest];
            ChannelEstimate est = lead.detection.estimate;
            if (options_.duplicate_policy == DuplicatePolicy::Average && g.size() > 1) {
                est.gains.setZero();
                for (auto c : g) est.gains += candidates[c].detection.estimate.gains;
                est.gains /= static_cast<double>(g.size());
            }

            const int existing = find_decoded(lead.attempt.payload);
            if (existing >= 0) {
                report_.aud.duplicates += static_cast<int>(g.size()) - 1;
                handle_duplicate(static_cast<std::size_t>(existing), est, lead.position);
                continue;
            }
            report_.aud.duplicates += static_cast<int>(g.size()) - 1;
            add_user(lead.attempt, lead.detection, est, lead.position, round, pass);
            fresh.push_back({report_.decoded.size() - 1, {est, lead.position}});
            progress = true;
        }

        if (options_.ic_ce_mode == IcEstimation::DataAided && !fresh.empty() && recancel_data_aided()) return progress;
        for (const auto& [q, rest] : fresh) cancel_pilot_only(q, rest.first, rest.second);
        if (!fresh.empty()) refresh_pilot_only(fresh.front().first);
        return progress;
    }

    const RxGrid& original_;
    const ResourceConfig& config_;
    const PilotPool& pool_;
    const RxOptions& options_;
    RxGrid work_;
    DecodeReport report_;
    std::vector<UeTransmission> reconstructions_;
    std::vector<CMatrix> cancel_gains_;
};

} // namespace

DecodeReport run_receiver(const RxGrid& grid, const ResourceConfig& config, const PilotPool& pool,
                          const RxOptions& options) {
    config.validate();
    options.validate();
    if (grid.w() != config.layout.w || grid.n_rx() != config.n_rx || grid.data_block.rows() != config.n_data_re)
        throw std::invalid_argument("run_receiver: grid shape does not match the config");
    if (static_cast<int>(pool.length) != config.layout.pool_size)
        throw std::invalid_argument("run_receiver: pool length does not match the layout");
    return Receiver(grid, config, pool, options).run();
}

} // namespace gfsim
