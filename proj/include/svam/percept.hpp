#pragma once

#include "svam/harness.hpp"
#include "svam/texture.hpp"
#include "svam/tracing.hpp"
#include "svam/vibro.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace svam {

enum class StrokeProfile { Constant, MinimumJerk };

// Decision noise that makes the simulated 16-vs-32 px accuracy match the
// 0.83 observed in the lab data (see calibrate_sigma; regenerated by the
// percept calibration test).
inline constexpr double kCalibratedSigma = 0.64;

// Virtual subject. Decision noise sigma acts on the log-cue difference.
struct SubjectParams {
    double sigma = kCalibratedSigma;
    double mean_speed_px_s = 240.0;
    double speed_jitter_cv = 0.15;  // lognormal, drawn per 5 s presentation
    std::uint64_t seed = 0;
    StrokeProfile profile = StrokeProfile::MinimumJerk;
    double stroke_px = 480.0;

    void validate() const;
};

// Observed switching rate: toggles per second over the touch window.
double fineness_cue(const VibrationTimeline& tl, double touch_s);

// P(First) = Phi((ln(1 + cue_first) - ln(1 + cue_second)) / sigma); 0.5 on
// ties; a step function when sigma = 0.
double probability_first(double cue_first, double cue_second, double sigma);

// Samples the probit choice. Always consumes one normal draw so runs with
// different sigma share random numbers.
Response decide_pair(double cue_first, double cue_second, const SubjectParams& params, std::mt19937_64& rng);

using TextureBank = std::map<int, TextureGrid>;

// Full-screen stripe grids for each width.
TextureBank make_texture_bank(const std::vector<int>& widths, const MappingConfig& mapping);

struct Presentation {
    double speed_px_s = 0.0;
    double start_x_px = 0.0;
    FrameSamples trace;
    double cue = 0.0;
};

// One touch of one texture: speed drawn lognormally around the mean, start
// phase uniform over one stripe period, trace sampled at the display refresh.
Presentation present_texture(const TextureGrid& grid, const MappingConfig& mapping, const SubjectParams& params,
                             double touch_s, std::mt19937_64& rng);

struct SimulatedTrial {
    TrialRecord record;
    Presentation first;
    Presentation second;
};

// Runs a participant through a schedule. Deterministic in (params.seed,
// participant id).
std::vector<SimulatedTrial> simulate_participant(const Schedule& schedule, const SessionConfig& cfg,
                                                 const MappingConfig& mapping, const SubjectParams& params,
                                                 const TextureBank* bank = nullptr);

// cfg.participants participants (ids 1..N), each with its own schedule, run in
// parallel. Output ordered by participant.
std::vector<SimulatedTrial> simulate_cohort(const SessionConfig& cfg, const MappingConfig& mapping,
                                            const SubjectParams& params);

std::vector<TrialRecord> records_of(const std::vector<SimulatedTrial>& trials);

// Fraction of `n` simulated presentations of the pair in which the finer
// texture is judged finer.
double pair_accuracy(int finer_px, int coarser_px, int n, const MappingConfig& mapping, const SubjectParams& params,
                     double touch_s = 5.0);

// Smallest sigma on a 0.005 grid in [0, 3] whose accuracy on the pair drops
// to `target` or below, using common random numbers across sigma.
double calibrate_sigma(double target, int finer_px, int coarser_px, int n, const MappingConfig& mapping,
                       SubjectParams params, double touch_s = 5.0);

}  // namespace svam
