#include "svam/harness.hpp"

#include "csv.hpp"
#include "svam/errors.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

namespace svam {

std::string_view to_string(Response r) { return r == Response::First ? "first" : "second"; }

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::First: return "first";
        case Phase::Rest: return "rest";
        case Phase::Second: return "second";
        case Phase::Respond: return "respond";
    }
    return "?";
}

void SessionConfig::validate() const {
    if (textures.size() < 2) throw std::invalid_argument("session config: need at least two textures");
    std::set<int> seen;
    for (int w : textures) {
        if (w < 1) throw std::invalid_argument("session config: texture widths must be >= 1");
        if (!seen.insert(w).second) throw std::invalid_argument("session config: duplicate texture width");
    }
    if (sets < 1) throw std::invalid_argument("session config: sets must be >= 1");
    if (pairs_per_set != 2 * unordered_pairs())
        throw std::invalid_argument("session config: pairs_per_set must be 2 x " + std::to_string(unordered_pairs()) +
                                    " (each unordered pair in both orders)");
    if (!(touch_s > 0.0) || !(rest_s >= 0.0)) throw std::invalid_argument("session config: bad phase durations");
    if (participants < 1) throw std::invalid_argument("session config: participants must be >= 1");
}

Schedule build_schedule(const SessionConfig& cfg, int participant_id) {
    cfg.validate();
    Schedule out{participant_id, {}};
    out.trials.reserve(static_cast<std::size_t>(cfg.trials_per_participant()));

    for (int set = 1; set <= cfg.sets; ++set) {
        std::vector<std::pair<int, int>> pairs;
        for (std::size_t i = 0; i < cfg.textures.size(); ++i)
            for (std::size_t j = i + 1; j < cfg.textures.size(); ++j) {
                pairs.emplace_back(cfg.textures[i], cfg.textures[j]);
                pairs.emplace_back(cfg.textures[j], cfg.textures[i]);
            }
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(participant_id), static_cast<std::uint32_t>(set)};
        std::mt19937_64 rng(seq);
        std::shuffle(pairs.begin(), pairs.end(), rng);

        int trial = 1;
        for (auto [a, b] : pairs) out.trials.push_back({set, trial++, a, b});
    }
    return out;
}

void validate_schedule(const Schedule& schedule, const SessionConfig& cfg) {
    const std::set<int> allowed(cfg.textures.begin(), cfg.textures.end());
    std::set<std::pair<int, int>> keys;
    for (const auto& t : schedule.trials) {
        if (!allowed.count(t.first_px) || !allowed.count(t.second_px))
            throw std::invalid_argument("schedule: texture outside the configured set");
        if (t.first_px == t.second_px) throw std::invalid_argument("schedule: trial compares a texture with itself");
        if (t.set_index < 1 || t.trial_index < 1) throw std::invalid_argument("schedule: indices are 1-based");
        if (!keys.emplace(t.set_index, t.trial_index).second)
            throw std::invalid_argument("schedule: duplicate (set, trial) index");
    }
    // Every set presents each ordered pair exactly once.
    std::map<int, std::set<std::pair<int, int>>> per_set;
    for (const auto& t : schedule.trials)
        if (!per_set[t.set_index].emplace(t.first_px, t.second_px).second)
            throw std::invalid_argument("schedule: set " + std::to_string(t.set_index) + " repeats an ordered pair");
    const auto ordered = static_cast<std::size_t>(cfg.textures.size() * (cfg.textures.size() - 1));
    for (const auto& [set, pairs] : per_set)
        if (pairs.size() != ordered)
            throw std::invalid_argument("schedule: set " + std::to_string(set) + " is not balanced");
}

PhaseTracker::PhaseTracker(const SessionConfig& cfg, const ScheduledTrial& trial, double start_s)
    : touch_s_(cfg.touch_s), rest_s_(cfg.rest_s), trial_(trial), start_s_(start_s), last_now_(start_s) {
    if (!(touch_s_ > 0.0) || !(rest_s_ >= 0.0)) throw std::invalid_argument("phase tracker: bad phase durations");
}

double PhaseTracker::boundary_s(Phase p) const {
    switch (p) {
        case Phase::First: return start_s_;
        case Phase::Rest: return start_s_ + touch_s_;
        case Phase::Second: return start_s_ + touch_s_ + rest_s_;
        case Phase::Respond: return start_s_ + 2.0 * touch_s_ + rest_s_;
    }
    return start_s_;
}

std::vector<PhaseEvent> PhaseTracker::advance(double now_s) {
    if (now_s < last_now_) throw SessionFault("phase tracker: clock went backwards");
    last_now_ = now_s;

    std::vector<PhaseEvent> out;
    auto emit = [&](Phase p) {
        phase_ = p;
        out.push_back({p, trial_.set_index, trial_.trial_index, boundary_s(p), now_s});
    };
    if (!started_) {
        started_ = true;
        emit(Phase::First);
    }
    for (Phase next : {Phase::Rest, Phase::Second, Phase::Respond}) {
        if (static_cast<int>(next) <= static_cast<int>(phase_)) continue;
        if (now_s < boundary_s(next)) break;
        emit(next);
    }
    return out;
}

void PhaseTracker::require_respond(double now_s) {
    advance(now_s);
    if (phase_ != Phase::Respond)
        throw PhaseViolation("response during phase '" + std::string(to_string(phase_)) + "'");
}

std::vector<PhaseEvent> run_phases(const SessionConfig& cfg, const ScheduledTrial& trial,
                                   const std::function<double()>& clock) {
    PhaseTracker tracker(cfg, trial, clock());
    std::vector<PhaseEvent> events;
    while (true) {
        auto step = tracker.advance(clock());
        events.insert(events.end(), step.begin(), step.end());
        if (tracker.phase() == Phase::Respond) return events;
    }
}

std::string write_trials_csv(std::span<const TrialRecord> records) {
    std::string out = "participant_id,set_index,trial_index,first_px,second_px,response,response_time_ms\n";
    for (const auto& r : records) {
        out += std::to_string(r.participant_id) + "," + std::to_string(r.set_index) + "," +
               std::to_string(r.trial_index) + "," + std::to_string(r.first_px) + "," + std::to_string(r.second_px) +
               "," + std::string(to_string(r.response)) + ",";
        if (r.response_time_ms) out += std::to_string(*r.response_time_ms);
        out += "\n";
    }
    return out;
}

std::vector<TrialRecord> read_trials_csv(std::string_view text) {
    csv::Reader reader(text);
    std::string_view line;
    if (!reader.next(line)) throw ParseError("trials csv: empty input", 1);
    const csv::Header header(line, reader.line_number());
    const auto ip = header.index("participant_id"), is = header.index("set_index"),
               it = header.index("trial_index"), i1 = header.index("first_px"), i2 = header.index("second_px"),
               ir = header.index("response");
    const bool has_rt = header.has("response_time_ms");
    const auto irt = has_rt ? header.index("response_time_ms") : 0;

    std::vector<TrialRecord> out;
    std::set<std::tuple<int, int, int>> keys;
    while (reader.next(line)) {
        const auto ln = reader.line_number();
        const auto f = csv::split(line);
        if (f.size() != header.size())
            throw ParseError("trials csv: expected " + std::to_string(header.size()) + " fields at line " +
                                 std::to_string(ln),
                             ln);
        TrialRecord r;
        r.participant_id = static_cast<int>(csv::parse_int(f[ip], ln, "participant_id"));
        r.set_index = static_cast<int>(csv::parse_int(f[is], ln, "set_index"));
        r.trial_index = static_cast<int>(csv::parse_int(f[it], ln, "trial_index"));
        r.first_px = static_cast<int>(csv::parse_int(f[i1], ln, "first_px"));
        r.second_px = static_cast<int>(csv::parse_int(f[i2], ln, "second_px"));
        if (f[ir] == "first")
            r.response = Response::First;
        else if (f[ir] == "second")
            r.response = Response::Second;
        else
            throw ParseError("trials csv: bad response '" + std::string(f[ir]) + "' at line " + std::to_string(ln), ln);
        if (has_rt && !f[irt].empty()) r.response_time_ms = csv::parse_int(f[irt], ln, "response_time_ms");
        if (r.first_px == r.second_px)
            throw ParseError("trials csv: first_px equals second_px at line " + std::to_string(ln), ln);
        if (!keys.emplace(r.participant_id, r.set_index, r.trial_index).second)
            throw ParseError("trials csv: duplicate (participant, set, trial) at line " + std::to_string(ln), ln);
        out.push_back(r);
    }
    return out;
}

std::string trace_file_name(int participant_id, int set_index, int trial_index, Response which) {
    return std::to_string(participant_id) + "_" + std::to_string(set_index) + "_" + std::to_string(trial_index) + "_" +
           std::string(to_string(which)) + ".csv";
}

}  // namespace svam
