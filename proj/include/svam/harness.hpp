#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svam {

enum class Response { First, Second };

std::string_view to_string(Response r);

// One two-alternative forced-choice trial: which of the two stripe textures
// felt finer.
struct TrialRecord {
    int participant_id = 0;
    int set_index = 1;    // 1-based
    int trial_index = 1;  // 1-based within the set
    int first_px = 0;
    int second_px = 0;
    Response response = Response::First;
    std::optional<std::int64_t> response_time_ms;

    int chosen_px() const { return response == Response::First ? first_px : second_px; }
    bool operator==(const TrialRecord&) const = default;
};

// Defaults reproduce the lab protocol: six stripe widths, four sets of 30
// presentations (each unordered pair in both orders), 5 s touches separated by
// a 1 s rest, five participants.
struct SessionConfig {
    std::vector<int> textures{1, 2, 4, 8, 16, 32};
    int sets = 4;
    int pairs_per_set = 30;
    double touch_s = 5.0;
    double rest_s = 1.0;
    int participants = 5;
    std::uint64_t seed = 0;

    int unordered_pairs() const {
        const auto n = static_cast<int>(textures.size());
        return n * (n - 1) / 2;
    }
    int trials_per_participant() const { return sets * pairs_per_set; }

    void validate() const;
};

struct ScheduledTrial {
    int set_index = 1;
    int trial_index = 1;
    int first_px = 0;
    int second_px = 0;

    bool operator==(const ScheduledTrial&) const = default;
};

struct Schedule {
    int participant_id = 0;
    std::vector<ScheduledTrial> trials;
};

// Every set holds each unordered pair once per presentation order, shuffled by
// a generator seeded from (seed, participant, set).
Schedule build_schedule(const SessionConfig& cfg, int participant_id);

// Checks a schedule against the config's texture set (distinct members of the
// set in each trial, 1-based contiguous indices).
void validate_schedule(const Schedule& schedule, const SessionConfig& cfg);

enum class Phase { First, Rest, Second, Respond };

std::string_view to_string(Phase p);

struct PhaseEvent {
    Phase phase = Phase::First;
    int set_index = 1;
    int trial_index = 1;
    double nominal_s = 0.0;   // scheduled boundary
    double observed_s = 0.0;  // clock reading at which the change was seen
};

// Incremental phase state machine for one trial:
// First [0, touch) -> Rest [touch, touch + rest) -> Second [.., 2 touch + rest)
// -> Respond (open-ended). Time is relative to `start_s` on the caller's clock.
class PhaseTracker {
public:
    PhaseTracker(const SessionConfig& cfg, const ScheduledTrial& trial, double start_s);

    // Phases entered since the last call, in order. The first call reports
    // First. Throws SessionFault when the clock runs backwards.
    std::vector<PhaseEvent> advance(double now_s);

    Phase phase() const { return phase_; }
    double start_s() const { return start_s_; }
    double boundary_s(Phase p) const;

    // Throws PhaseViolation unless the trial is in Respond at `now_s`.
    void require_respond(double now_s);

private:
    double touch_s_;
    double rest_s_;
    ScheduledTrial trial_;
    double start_s_;
    double last_now_;
    Phase phase_ = Phase::First;
    bool started_ = false;
};

// Polls `clock` (seconds, monotonic) until the trial reaches Respond and
// returns the four phase-entry events.
std::vector<PhaseEvent> run_phases(const SessionConfig& cfg, const ScheduledTrial& trial,
                                   const std::function<double()>& clock);

std::string write_trials_csv(std::span<const TrialRecord> records);

// Throws ParseError (with line number) on missing columns, bad values or a
// duplicate (participant, set, trial) key. response_time_ms is optional.
std::vector<TrialRecord> read_trials_csv(std::string_view text);

// "<participant>_<set>_<trial>_<first|second>.csv"
std::string trace_file_name(int participant_id, int set_index, int trial_index, Response which);

}  // namespace svam
