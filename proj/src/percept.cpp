#include "svam/percept.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iterator>
#include <stdexcept>

#include "svam/scaling.hpp"

namespace svam {

void SubjectParams::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("subject: sigma must be >= 0");
    if (!(mean_speed_px_s > 0.0)) throw std::invalid_argument("subject: mean speed must be > 0");
    if (!(speed_jitter_cv >= 0.0 && speed_jitter_cv < 1.0))
        throw std::invalid_argument("subject: speed jitter CV must be in [0, 1)");
    if (!(stroke_px > 0.0)) throw std::invalid_argument("subject: stroke length must be > 0");
}

double fineness_cue(const VibrationTimeline& tl, double touch_s) { return toggle_rate(tl, touch_s); }

double probability_first(double cue_first, double cue_second, double sigma) {
    if (cue_first < 0.0 || cue_second < 0.0) throw std::invalid_argument("probability_first: cues must be >= 0");
    const double d = std::log1p(cue_first) - std::log1p(cue_second);
    if (d == 0.0) return 0.5;
    if (sigma == 0.0) return d > 0.0 ? 1.0 : 0.0;
    return norm_cdf(d / sigma);
}

Response decide_pair(double cue_first, double cue_second, const SubjectParams& params, std::mt19937_64& rng) {
    if (cue_first < 0.0 || cue_second < 0.0) throw std::invalid_argument("decide_pair: cues must be >= 0");
    std::normal_distribution<double> noise(0.0, 1.0);
    const double d = std::log1p(cue_first) - std::log1p(cue_second) + params.sigma * noise(rng);
    if (d > 0.0) return Response::First;
    if (d < 0.0) return Response::Second;
    return std::bernoulli_distribution(0.5)(rng) ? Response::First : Response::Second;
}

TextureBank make_texture_bank(const std::vector<int>& widths, const MappingConfig& mapping) {
    mapping.validate();
    TextureBank bank;
    for (int w : widths) bank.emplace(w, make_stripes(w, mapping.screen_w_px, mapping.screen_h_px));
    return bank;
}

namespace {

double draw_speed(const SubjectParams& params, std::mt19937_64& rng) {
    if (params.speed_jitter_cv == 0.0) return params.mean_speed_px_s;
    // Lognormal with E[v] = mean and CV as configured.
    const double s2 = std::log1p(params.speed_jitter_cv * params.speed_jitter_cv);
    std::normal_distribution<double> n(std::log(params.mean_speed_px_s) - 0.5 * s2, std::sqrt(s2));
    return std::exp(n(rng));
}

}  // namespace

Presentation present_texture(const TextureGrid& grid, const MappingConfig& mapping, const SubjectParams& params,
                             double touch_s, std::mt19937_64& rng) {
    const double period = 2.0 * grid.stripe_width().value_or(1);
    Presentation out;
    out.speed_px_s = draw_speed(params, rng);
    out.start_x_px = std::uniform_real_distribution<double>(0.0, period)(rng);
    const double y = 0.5 * grid.height();

    const Trajectory traj =
        params.profile == StrokeProfile::MinimumJerk
            ? stroke_sweep({.start_x_px = out.start_x_px,
                            .mean_speed_px_s = out.speed_px_s,
                            .duration_s = touch_s,
                            .stroke_px = params.stroke_px,
                            .y_px = y})
            : constant_sweep({.start_x_px = out.start_x_px,
                              .speed_px_s = out.speed_px_s,
                              .duration_s = touch_s,
                              .x_min_px = out.start_x_px,
                              .x_max_px = out.start_x_px + params.stroke_px,
                              .reversing = true,
                              .y_px = y});
    out.trace = sample_at_refresh(traj, mapping.refresh_hz);
    const auto tl = render_timeline(grid, out.trace, mapping);
    out.cue = fineness_cue(tl, std::min(touch_s, tl.span_s()));
    return out;
}

std::vector<SimulatedTrial> simulate_participant(const Schedule& schedule, const SessionConfig& cfg,
                                                 const MappingConfig& mapping, const SubjectParams& params,
                                                 const TextureBank* bank) {
    cfg.validate();
    params.validate();
    validate_schedule(schedule, cfg);
    TextureBank own;
    if (bank == nullptr) {
        own = make_texture_bank(cfg.textures, mapping);
        bank = &own;
    }

    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(schedule.participant_id), 0x5ca1eu};
    std::mt19937_64 rng(seq);

    std::vector<SimulatedTrial> out;
    out.reserve(schedule.trials.size());
    for (const auto& t : schedule.trials) {
        SimulatedTrial st;
        st.first = present_texture(bank->at(t.first_px), mapping, params, cfg.touch_s, rng);
        st.second = present_texture(bank->at(t.second_px), mapping, params, cfg.touch_s, rng);
        st.record = {schedule.participant_id, t.set_index, t.trial_index, t.first_px, t.second_px,
                     decide_pair(st.first.cue, st.second.cue, params, rng), std::nullopt};
        out.push_back(std::move(st));
    }
    return out;
}

std::vector<SimulatedTrial> simulate_cohort(const SessionConfig& cfg, const MappingConfig& mapping,
                                            const SubjectParams& params) {
    cfg.validate();
    params.validate();
    const auto bank = make_texture_bank(cfg.textures, mapping);

    std::vector<std::future<std::vector<SimulatedTrial>>> jobs;
    for (int p = 1; p <= cfg.participants; ++p)
        jobs.push_back(std::async(std::launch::async, [&, p] {
            return simulate_participant(build_schedule(cfg, p), cfg, mapping, params, &bank);
        }));

    std::vector<SimulatedTrial> out;
    for (auto& j : jobs) {
        auto part = j.get();
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

std::vector<TrialRecord> records_of(const std::vector<SimulatedTrial>& trials) {
    std::vector<TrialRecord> out;
    out.reserve(trials.size());
    for (const auto& t : trials) out.push_back(t.record);
    return out;
}

namespace {

struct CuePair {
    double finer;
    double coarser;
    double z;
    bool coin;
};

std::vector<CuePair> draw_cue_pairs(int finer_px, int coarser_px, int n, const MappingConfig& mapping,
                                    const SubjectParams& params, double touch_s) {
    if (n < 1) throw std::invalid_argument("pair accuracy: n must be >= 1");
    const auto bank = make_texture_bank({finer_px, coarser_px}, mapping);
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(finer_px), static_cast<std::uint32_t>(coarser_px)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<CuePair> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double a = present_texture(bank.at(finer_px), mapping, params, touch_s, rng).cue;
        const double b = present_texture(bank.at(coarser_px), mapping, params, touch_s, rng).cue;
        const double z = noise(rng);
        const bool coin = std::bernoulli_distribution(0.5)(rng);
        out.push_back({a, b, z, coin});
    }
    return out;
}

double accuracy_at(const std::vector<CuePair>& pairs, double sigma) {
    int correct = 0;
    for (const auto& p : pairs) {
        const double d = std::log1p(p.finer) - std::log1p(p.coarser) + sigma * p.z;
        correct += d > 0.0 || (d == 0.0 && p.coin);
    }
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

}  // namespace

double pair_accuracy(int finer_px, int coarser_px, int n, const MappingConfig& mapping, const SubjectParams& params,
                     double touch_s) {
    params.validate();
    return accuracy_at(draw_cue_pairs(finer_px, coarser_px, n, mapping, params, touch_s), params.sigma);
}

double calibrate_sigma(double target, int finer_px, int coarser_px, int n, const MappingConfig& mapping,
                       SubjectParams params, double touch_s) {
    params.validate();
    const auto pairs = draw_cue_pairs(finer_px, coarser_px, n, mapping, params, touch_s);
    for (int i = 0; i <= 600; ++i) {
        const double sigma = 0.005 * i;
        if (accuracy_at(pairs, sigma) <= target) return sigma;
    }
    return 3.0;
}

}  // namespace svam
