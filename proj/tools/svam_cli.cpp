// svam: stripe-texture vibration tools.
//
//   svam texgen   --line-width W [--width 1920 --height 1080] --out FILE.pgm
//   svam alias    [--speed 240 --refresh 60 --widths 1,2,4,8,16,32]
//   svam simulate [--participants 5 --sets 4 --speed 240 --sigma S --seed N] --out-dir DIR
//   svam analyze  --trials DIR|FILE | --matrix FILE.csv [--out scales.csv]
//   svam serve    [--port 8765 --refresh 60 --no-frame-quantize --out-dir sessions]
//
// Exit status: 0 ok, 2 bad arguments, 3 unreadable or malformed data.

#include "svam/errors.hpp"
#include "svam/harness.hpp"
#include "svam/percept.hpp"
#include "svam/scaling.hpp"
#include "svam/server.hpp"
#include "svam/session.hpp"
#include "svam/texture.hpp"
#include "svam/vibro.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <pthread.h>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace svam;

namespace {

constexpr int kExitArgs = 2;
constexpr int kExitData = 3;

// Data errors are reported with exit status 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size())))
        throw DataError("cannot write " + path.string());
}

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

void print_scales(std::ostream& os, const ScaleValues& s) {
    os << "scale values (min anchored at 0):\n";
    for (std::size_t i = 0; i < s.labels.size(); ++i)
        os << "  " << std::setw(4) << s.labels[i] << " px  " << fixed(s.values[i], 4) << '\n';
    for (const auto& w : s.warnings) os << "warning: " << w << '\n';
}

struct TexgenArgs {
    int line_width = 0;
    int width = 1920;
    int height = 1080;
    std::string out;
};

int run_texgen(const TexgenArgs& a) {
    const auto grid = make_stripes(a.line_width, a.width, a.height);
    write_file(a.out, to_pgm(grid));
    std::cout << "wrote " << a.out << " (" << a.width << "x" << a.height << ", line width " << a.line_width
              << " px)\n";
    return 0;
}

struct AliasArgs {
    double speed = 240.0;
    double refresh = 60.0;
    std::vector<int> widths{1, 2, 4, 8, 16, 32};
};

int run_alias(const AliasArgs& a) {
    MappingConfig mapping;
    mapping.refresh_hz = a.refresh;
    std::cout << "speed " << a.speed << " px/s, refresh " << a.refresh << " Hz\n";
    std::cout << "width_px  width_mm  true_hz  alias_hz\n";
    for (int w : a.widths) {
        std::cout << std::setw(8) << w << "  " << std::setw(8) << fixed(convert_length(w, LengthDirection::PxToMm, mapping), 2)
                  << "  " << std::setw(7) << fixed(stripe_frequency(a.speed, w), 2) << "  " << std::setw(8)
                  << fixed(alias_frequency(a.speed, w, a.refresh), 2) << '\n';
    }
    return 0;
}

struct SimulateArgs {
    int participants = 5;
    int sets = 4;
    double speed = 240.0;
    double sigma = kCalibratedSigma;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool no_traces = false;
};

int run_simulate(const SimulateArgs& a) {
    SessionConfig cfg;
    cfg.participants = a.participants;
    cfg.sets = a.sets;
    cfg.seed = a.seed;
    cfg.validate();
    SubjectParams params;
    params.sigma = a.sigma;
    params.mean_speed_px_s = a.speed;
    params.seed = a.seed;
    params.validate();
    const MappingConfig mapping;

    const auto trials = simulate_cohort(cfg, mapping, params);
    const auto records = records_of(trials);
    const fs::path dir(a.out_dir);
    write_file(dir / "trials.csv", write_trials_csv(records));
    if (!a.no_traces) {
        for (const auto& t : trials) {
            const auto& r = t.record;
            write_file(dir / "traces" / trace_file_name(r.participant_id, r.set_index, r.trial_index, Response::First),
                       write_frames_csv(t.first.trace));
            write_file(dir / "traces" / trace_file_name(r.participant_id, r.set_index, r.trial_index, Response::Second),
                       write_frames_csv(t.second.trace));
        }
    }
    const auto matrix = tally_matrix(records, cfg.textures);
    write_file(dir / "matrix.csv", write_matrix_csv(matrix));
    std::cout << records.size() << " trials from " << a.participants << " participants\n";
    std::cout << format_matrix(matrix);
    if (matrix.complete()) {
        const auto scales = thurstone_case_v(matrix);
        write_file(dir / "scales.csv", write_scales_csv(scales));
        print_scales(std::cout, scales);
    }
    std::cout << "output in " << dir.string() << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string trials;
    std::string matrix;
    std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
    std::optional<PairwiseMatrix> m;
    if (!a.trials.empty()) {
        fs::path p(a.trials);
        if (fs::is_directory(p)) p /= "trials.csv";
        m = tally_matrix(read_trials_csv(read_file(p)));
    } else {
        m = read_matrix_csv(read_file(a.matrix));
    }
    std::cout << format_matrix(*m);
    if (!m->complete()) throw DataError("matrix has pairs with no trials; cannot scale");
    const auto scales = thurstone_case_v(*m);
    print_scales(std::cout, scales);
    const auto report = consistency_check(*m, scales);
    std::cout << "consistency: mean |p - p_hat| = " << fixed(report.mad, 4) << ", chi-square = " << fixed(report.chi_square, 3)
              << " (dof " << report.dof << ")\n";
    if (!a.out.empty()) {
        write_file(a.out, write_scales_csv(scales));
        std::cout << "wrote " << a.out << '\n';
    }
    return 0;
}

struct ServeArgs {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8765;
    double refresh = 60.0;
    bool no_frame_quantize = false;
    std::string out_dir = "sessions";
    int threads = 2;
};

int run_serve(const ServeArgs& a) {
    ServiceConfig cfg;
    cfg.mapping.refresh_hz = a.refresh;
    cfg.mapping.validate();
    cfg.frame_quantize = !a.no_frame_quantize;
    cfg.out_dir = a.out_dir;
    // Block the stop signals before any worker thread exists so only the
    // sigwait below sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    SessionManager manager(cfg);
    SessionServer server(manager, a.address, a.port, a.threads);
    server.start();
    std::cout << "serving ws://" << a.address << ':' << server.port() << "/session (refresh " << a.refresh
              << " Hz, frame quantization " << (cfg.frame_quantize ? "on" : "off") << ")" << std::endl;
    int sig = 0;
    sigwait(&stop_signals, &sig);
    std::cout << "stopping" << std::endl;
    server.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stripe-texture vibration rendering, simulation and analysis"};
    app.require_subcommand(1);

    TexgenArgs tex;
    auto* texgen = app.add_subcommand("texgen", "write a vertical stripe texture as PGM");
    texgen->add_option("--line-width", tex.line_width, "stripe width in px")->required();
    texgen->add_option("--width", tex.width, "image width in px");
    texgen->add_option("--height", tex.height, "image height in px");
    texgen->add_option("--out", tex.out, "output .pgm file")->required();

    AliasArgs al;
    auto* alias = app.add_subcommand("alias", "true and frame-aliased stripe frequencies");
    alias->add_option("--speed", al.speed, "cursor speed in px/s");
    alias->add_option("--refresh", al.refresh, "display refresh rate in Hz");
    alias->add_option("--widths", al.widths, "stripe widths in px")->delimiter(',');

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run simulated participants through the experiment");
    simulate->add_option("--participants", sim.participants);
    simulate->add_option("--sets", sim.sets);
    simulate->add_option("--speed", sim.speed, "mean tracing speed in px/s");
    simulate->add_option("--sigma", sim.sigma, "decision noise");
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--out-dir", sim.out_dir)->required();
    simulate->add_flag("--no-traces", sim.no_traces, "skip per-presentation frame CSVs");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "tally trials and compute scale values");
    auto* trials_opt = analyze->add_option("--trials", an.trials, "trials.csv or a directory containing it");
    auto* matrix_opt = analyze->add_option("--matrix", an.matrix, "proportion matrix CSV");
    trials_opt->excludes(matrix_opt);
    analyze->add_option("--out", an.out, "write scale values CSV");

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "run the WebSocket session server");
    serve->add_option("--address", sv.address);
    serve->add_option("--port", sv.port);
    serve->add_option("--refresh", sv.refresh, "display refresh rate in Hz");
    serve->add_flag("--no-frame-quantize", sv.no_frame_quantize, "evaluate every pointer report");
    serve->add_option("--out-dir", sv.out_dir, "where finalized sessions are written");
    serve->add_option("--threads", sv.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitArgs;
    }

    try {
        if (*texgen) return run_texgen(tex);
        if (*alias) return run_alias(al);
        if (*simulate) return run_simulate(sim);
        if (*analyze) {
            if (an.trials.empty() == an.matrix.empty()) {
                std::cerr << "analyze: give exactly one of --trials or --matrix\n";
                return kExitArgs;
            }
            return run_analyze(an);
        }
        if (*serve) return run_serve(sv);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitArgs;
}
