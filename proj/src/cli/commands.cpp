#include "ptycho/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptycho/epie.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/phantom.hpp"

namespace ptycho::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ReconSettings {
    std::string prior = "none";
    double lambda_pr = 0.01;
    double lambda_cc = 0.01;
    std::optional<double> lambda_x;
    double lambda_x_high = 0.005;
    double lambda_x_low = 0.01;
    double stp_sigma = 1.5;
    double lr_object = 0.1;
    double lr_probe = 0.01;
    std::size_t batch = 16;
    std::size_t epochs = 500;
    std::size_t warmup = 0;
    std::uint64_t seed = 0;
    std::string probe_file;
    bool fix_probe = false;
};

struct OpticsFlags {
    CLI::Option* defocus = nullptr;
    CLI::Option* wavelength = nullptr;
    CLI::Option* pixel_pitch = nullptr;
};

OpticsFlags add_optics_options(CLI::App* app, Optics& o) {
    OpticsFlags f;
    f.defocus = app->add_option("--defocus", o.defocus, "Defocus distance in metres")
                    ->capture_default_str()->check(CLI::NonNegativeNumber);
    f.wavelength = app->add_option("--wavelength", o.wavelength, "Wavelength in metres")
                       ->capture_default_str()->check(CLI::PositiveNumber);
    f.pixel_pitch = app->add_option("--pixel-pitch", o.pixel_pitch, "Object pixel pitch in metres")
                        ->capture_default_str()->check(CLI::PositiveNumber);
    return f;
}

void add_sim_options(CLI::App* app, SimSettings& s, bool with_keep = true) {
    auto* phantom = app->add_option("--phantom", s.phantom, "Built-in phantom")
                        ->capture_default_str()->check(CLI::IsMember({"chip-like"}));
    app->add_option("--object", s.object_file, "Ground-truth object field file")->excludes(phantom);
    app->add_option("--object-size", s.object_size, "Phantom side length in pixels")
        ->capture_default_str()->check(CLI::Range(std::size_t{8}, std::size_t{1} << 14));
    app->add_option("--probe-sigma", s.probe_sigma, "Gaussian probe width in pixels")
        ->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--probe-size", s.probe_size, "Probe window side in pixels (0: 4 sigma)")->capture_default_str();
    app->add_option("--plan", s.plan, "Scan plan")->capture_default_str()->check(CLI::IsMember({"raster", "fermat"}));
    app->add_option("--step", s.step, "Raster step in pixels")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--jitter", s.jitter, "Raster position jitter in pixels")->capture_default_str();
    app->add_option("--n-points", s.n_points, "Fermat spiral point count")
        ->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--spacing", s.spacing, "Fermat mean point spacing in pixels")
        ->capture_default_str()->check(CLI::PositiveNumber);
    if (with_keep) {
        app->add_option("--keep", s.keep, "Thin the fermat plan to this many points (0: all)")->capture_default_str();
    }
    add_optics_options(app, s.optics);
}

void add_recon_options(CLI::App* app, ReconSettings& r) {
    app->add_option("--prior", r.prior, "Image prior")->capture_default_str()->check(CLI::IsMember({"none", "tv", "stp"}));
    app->add_option("--lambda-pr", r.lambda_pr, "Probe smoothness weight")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--lambda-cc", r.lambda_cc, "Cross-channel weight")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--lambda-x", r.lambda_x, "Image prior weight (default: by overlap)")->check(CLI::NonNegativeNumber);
    app->add_option("--lambda-x-high", r.lambda_x_high, "Image prior weight when overlap >= 0.5")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--lambda-x-low", r.lambda_x_low, "Image prior weight when overlap < 0.5")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--stp-sigma", r.stp_sigma, "Structure tensor smoothing in pixels")
        ->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr-object", r.lr_object, "Object learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr-probe", r.lr_probe, "Probe learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--batch", r.batch, "Minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--epochs", r.epochs, "Epoch count")->capture_default_str();
    app->add_option("--probe-warmup", r.warmup, "Object-only epochs before probe updates")->capture_default_str();
    app->add_option("--seed", r.seed, "Random seed")->capture_default_str();
    app->add_option("--probe", r.probe_file, "Initial probe field file")->check(CLI::ExistingFile);
    app->add_flag("--fix-probe", r.fix_probe, "Keep the initial probe fixed");
}

std::size_t probe_side(const SimSettings& s) {
    return s.probe_size ? s.probe_size : static_cast<std::size_t>(std::lround(4.0 * s.probe_sigma));
}

ScanPlan make_plan(const SimSettings& s, Extent object, Extent probe) {
    if (s.plan == "raster") return jittered_raster_plan(object, probe, s.step, s.jitter, s.seed);
    const PointF center{0.5 * static_cast<double>(object.rows - probe.rows),
                        0.5 * static_cast<double>(object.cols - probe.cols)};
    ScanPlan plan = fermat_plan(s.n_points, s.spacing, center, object, probe);
    if (s.keep != 0) plan = thin_plan(plan, std::min(s.keep, plan.size()));
    return plan;
}

ReconConfig recon_config(const ReconSettings& r, double overlap, const Optics& optics, unsigned threads) {
    ReconConfig c;
    c.weights.kind = parse_prior_kind(r.prior);
    c.weights.lambda_pr = r.lambda_pr;
    c.weights.lambda_cc = r.lambda_cc;
    c.weights.lambda_x = c.weights.kind == PriorKind::None
                             ? 0.0
                             : r.lambda_x.value_or(auto_lambda_x(overlap, r.lambda_x_high, r.lambda_x_low));
    c.weights.stp_sigma = r.stp_sigma;
    c.lr_object = r.lr_object;
    c.lr_probe = r.lr_probe;
    c.batch_size = r.batch;
    c.epochs = r.epochs;
    c.probe_warmup_epochs = r.warmup;
    c.seed = r.seed;
    c.fix_probe = r.fix_probe;
    c.optics = optics;
    c.threads = threads;
    if (!r.probe_file.empty()) c.initial_probe = read_field(r.probe_file);
    if (c.fix_probe && !c.initial_probe) throw std::invalid_argument("--fix-probe requires --probe");
    c.validate();
    return c;
}

json config_json(const ReconConfig& c) {
    return {{"prior", to_string(c.weights.kind)},
            {"lambda_pr", c.weights.lambda_pr},
            {"lambda_cc", c.weights.lambda_cc},
            {"lambda_x", c.weights.lambda_x},
            {"stp_sigma", c.weights.stp_sigma},
            {"lr_object", c.lr_object},
            {"lr_probe", c.lr_probe},
            {"batch", c.batch_size},
            {"epochs", c.epochs},
            {"probe_warmup", c.probe_warmup_epochs},
            {"seed", c.seed},
            {"fix_probe", c.fix_probe},
            {"defocus", c.optics.defocus},
            {"wavelength", c.optics.wavelength},
            {"pixel_pitch", c.optics.pixel_pitch}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(path.string() + ": cannot open for writing");
    f << text;
    if (!f) throw IoError(path.string() + ": write failed");
}

void export_channels(const ComplexField2D& f, const fs::path& dir, const std::string& stem) {
    const Polar p = split(f);
    export_image(p.magnitude, dir / (stem + "_magnitude.pgm"));
    export_image(p.phase, dir / (stem + "_phase.pgm"));
}

/// Dataset optics recorded by `simulate`, overridden by flags given explicitly.
Optics dataset_optics(const DatasetManifest& m, Optics flags, const OpticsFlags& given) {
    auto pick = [&](const char* key, double& value, CLI::Option* opt) {
        if (opt->count() == 0 && m.scan.count(key)) value = m.scan.at(key);
    };
    pick("defocus", flags.defocus, given.defocus);
    pick("wavelength", flags.wavelength, given.wavelength);
    pick("pixel_pitch", flags.pixel_pitch, given.pixel_pitch);
    return flags;
}

double manifest_overlap(const DatasetManifest& m) {
    return m.scan.count("overlap") ? m.scan.at("overlap") : 1.0;
}

PixelMask truth_mask(const fs::path& truth_dir, const ComplexField2D& truth) {
    if (!fs::exists(truth_dir / "manifest.json")) return {};
    const DatasetManifest m = read_manifest(truth_dir);
    if (m.object.rows != truth.rows() || m.object.cols != truth.cols()) {
        throw std::invalid_argument("evaluate: truth manifest object size does not match the truth field");
    }
    return coverage_mask({m.positions, m.probe, m.object});
}

fs::path field_in(const fs::path& p, const char* name) {
    return fs::is_directory(p) ? p / name : p;
}

/// Splices settings from a `--config` file into `args` (normal order) right after
/// the subcommand name. Keys mirror flag names, at top level or under a section
/// named after the subcommand; flags given on the command line win.
std::vector<std::string> with_config(std::vector<std::string> args, const CLI::App& app) {
    if (args.empty()) return args;
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::string file;
    std::set<std::string> given;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        const auto eq = a.find('=');
        const std::string name = a.substr(0, eq);
        if (name == "--config") {
            if (eq != std::string::npos) {
                file = a.substr(eq + 1);
            } else if (i + 1 < args.size()) {
                file = args[i + 1];
            }
        }
        given.insert(name);
    }
    if (file.empty()) return args;
    std::ifstream in(file);
    if (!in) throw CLI::FileError("--config: cannot read '" + file + "'");
    std::vector<std::string> extra;
    for (const auto& item : CLI::ConfigTOML().from_config(in)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && (item.parents.size() != 1 || item.parents.front() != sub->get_name())) continue;
        const std::string flag = "--" + item.name;
        if (given.count(flag)) continue;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt != nullptr && opt->get_expected_min() == 0) {
            if (item.inputs.size() == 1 && item.inputs.front() == "true") extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    return args;
}

struct Commands {
    SimSettings sim;
    fs::path sim_out;

    fs::path data_dir;
    ReconSettings recon;
    Optics recon_optics;
    OpticsFlags recon_optics_flags;
    fs::path recon_out;

    fs::path epie_data;
    std::size_t sweeps = 300;
    double alpha = 1.0;
    double beta = 1.0;
    std::uint64_t epie_seed = 0;
    Optics epie_optics;
    OpticsFlags epie_optics_flags;
    fs::path epie_out;

    fs::path eval_recon;
    fs::path eval_truth;
    fs::path eval_out;

    SimSettings sweep_sim;
    ReconSettings sweep_recon;
    std::vector<std::size_t> sweep_steps{8, 16, 24, 32};
    std::vector<std::size_t> sweep_keep;
    std::vector<std::string> sweep_priors{"none", "tv", "stp"};
    std::size_t sweep_sweeps = 300;
    fs::path sweep_out;
};

int do_simulate(const Commands& c, std::ostream& out) {
    const Simulation s = simulate(c.sim);
    write_dataset(s.dataset, c.sim_out, s.manifest);
    write_field(s.object, c.sim_out / "object_true.field");
    write_field(s.probe, c.sim_out / "probe_true.field");
    export_channels(s.object, c.sim_out, "object_true");
    export_channels(s.probe, c.sim_out, "probe_true");
    out << "simulated " << s.dataset.size() << " patterns, overlap " << format_double(s.overlap) << " -> "
        << c.sim_out.string() << "\n";
    return 0;
}

int do_reconstruct(const Commands& c, std::ostream& out) {
    const DiffractionSet data = read_dataset(c.data_dir);
    const DatasetManifest m = read_manifest(c.data_dir);
    const Optics optics = dataset_optics(m, c.recon_optics, c.recon_optics_flags);
    const ReconConfig config = recon_config(c.recon, manifest_overlap(m), optics, threads_from_env());
    const ReconResult r = reconstruct(data, config);

    fs::create_directories(c.recon_out);
    write_field(r.object, c.recon_out / "object.field");
    write_field(r.probe, c.recon_out / "probe.field");
    write_history_csv(r.history, c.recon_out / "history.csv");
    export_channels(r.object, c.recon_out, "object");
    export_channels(r.probe, c.recon_out, "probe");
    json run = config_json(config);
    run["command"] = "reconstruct";
    run["data"] = c.data_dir.string();
    write_text(c.recon_out / "run.json", run.dump(2) + "\n");
    if (!r.history.empty()) out << "final E_o " << format_double(r.history.back().fidelity) << "\n";
    return 0;
}

int do_epie(const Commands& c, std::ostream& out) {
    const DiffractionSet data = read_dataset(c.epie_data);
    const DatasetManifest m = read_manifest(c.epie_data);
    const Optics optics = dataset_optics(m, c.epie_optics, c.epie_optics_flags);
    const EpieResult r = epie_run(data, c.sweeps, c.epie_seed, c.alpha, c.beta, optics);

    fs::create_directories(c.epie_out);
    write_field(r.object, c.epie_out / "object.field");
    write_field(r.probe, c.epie_out / "probe.field");
    write_residual_csv(r.initial_residual, r.residual_history, c.epie_out / "residual.csv");
    export_channels(r.object, c.epie_out, "object");
    export_channels(r.probe, c.epie_out, "probe");
    const json run = {{"command", "epie"},     {"data", c.epie_data.string()}, {"sweeps", c.sweeps},
                      {"alpha", c.alpha},      {"beta", c.beta},               {"seed", c.epie_seed},
                      {"defocus", optics.defocus}, {"wavelength", optics.wavelength},
                      {"pixel_pitch", optics.pixel_pitch}};
    write_text(c.epie_out / "run.json", run.dump(2) + "\n");
    const double last = r.residual_history.empty() ? r.initial_residual : r.residual_history.back();
    out << "final residual " << format_double(last) << "\n";
    return 0;
}

int do_evaluate(const Commands& c, std::ostream& out) {
    const ComplexField2D est = read_field(field_in(c.eval_recon, "object.field"));
    const ComplexField2D truth = read_field(field_in(c.eval_truth, "object_true.field"));
    const PixelMask mask = fs::is_directory(c.eval_truth) ? truth_mask(c.eval_truth, truth) : PixelMask{};
    const Evaluation e = evaluate(est, truth, mask);
    const std::string csv = "ssim_phase,ssim_magnitude\n" + format_double(e.ssim_phase) + "," +
                            format_double(e.ssim_magnitude) + "\n";
    if (c.eval_out.has_parent_path()) fs::create_directories(c.eval_out.parent_path());
    write_text(c.eval_out, csv);
    out << csv;
    return 0;
}

int do_sweep(const Commands& c, std::ostream& out) {
    const unsigned threads = threads_from_env();
    for (const auto& p : c.sweep_priors) {
        if (p != "epie") parse_prior_kind(p);
    }
    std::vector<SimSettings> cases;
    if (c.sweep_sim.plan == "raster") {
        for (std::size_t step : c.sweep_steps) {
            SimSettings s = c.sweep_sim;
            s.seed = c.sweep_recon.seed;
            s.step = step;
            cases.push_back(s);
        }
    } else {
        const std::vector<std::size_t> keep = c.sweep_keep.empty() ? std::vector{c.sweep_sim.n_points} : c.sweep_keep;
        for (std::size_t k : keep) {
            SimSettings s = c.sweep_sim;
            s.seed = c.sweep_recon.seed;
            s.keep = k;
            cases.push_back(s);
        }
    }

    std::vector<SweepRow> rows;
    for (const auto& s : cases) {
        const Simulation sim = simulate(s);
        const PixelMask mask = coverage_mask(sim.dataset.plan);
        for (const auto& prior : c.sweep_priors) {
            SweepRow row;
            row.overlap = sim.overlap;
            row.prior = prior;
            ComplexField2D est;
            if (prior == "epie") {
                const EpieResult r = epie_run(sim.dataset, c.sweep_sweeps, c.sweep_recon.seed, 1.0, 1.0, s.optics);
                est = r.object;
                row.final_fidelity = r.residual_history.empty() ? r.initial_residual : r.residual_history.back();
            } else {
                ReconSettings rs = c.sweep_recon;
                rs.prior = prior;
                const ReconResult r = reconstruct(sim.dataset, recon_config(rs, sim.overlap, s.optics, threads));
                est = r.object;
                row.final_fidelity = r.history.empty()
                                         ? data_fidelity(r.object, r.probe, sim.dataset, all_indices(sim.dataset))
                                         : r.history.back().fidelity;
            }
            const Evaluation e = evaluate(est, sim.object, mask);
            row.ssim_phase = e.ssim_phase;
            row.ssim_magnitude = e.ssim_magnitude;
            out << "overlap " << format_double(row.overlap) << " points " << sim.dataset.size() << " " << prior
                << ": ssim_phase " << format_double(row.ssim_phase) << "\n";
            rows.push_back(row);
        }
    }
    write_sweep_csv(rows, c.sweep_out);
    return 0;
}

}  // namespace

Simulation simulate(const SimSettings& s) {
    Simulation sim;
    if (!s.object_file.empty()) {
        sim.object = read_field(s.object_file);
    } else {
        sim.object = chip_like_phantom({s.object_size, s.object_size}, s.seed);
    }
    const Extent object{sim.object.rows(), sim.object.cols()};
    const std::size_t side = probe_side(s);
    if (side == 0) throw std::invalid_argument("--probe-size: probe window must be at least 1 pixel");
    const Extent probe{side, side};
    sim.probe = gaussian_probe(probe, s.probe_sigma, defocus_curvature(s.optics));
    const ScanPlan plan = make_plan(s, object, probe);
    sim.dataset = ptycho::simulate(sim.object, sim.probe, plan);
    sim.overlap = plan_overlap(s, plan);

    DatasetManifest& m = sim.manifest;
    m.plan_kind = s.plan;
    m.scan = {{"probe_sigma", s.probe_sigma},
              {"overlap", sim.overlap},
              {"defocus", s.optics.defocus},
              {"wavelength", s.optics.wavelength},
              {"pixel_pitch", s.optics.pixel_pitch}};
    if (s.plan == "raster") {
        m.scan["step"] = static_cast<double>(s.step);
        m.scan["jitter"] = static_cast<double>(s.jitter);
    } else {
        m.scan["n_points"] = static_cast<double>(s.n_points);
        m.scan["spacing"] = s.spacing;
        m.scan["mean_spacing"] = mean_nearest_neighbor_spacing(plan);
    }
    m.provenance = "ptycho simulate: " +
                   (s.object_file.empty() ? "phantom " + s.phantom + " " + std::to_string(s.object_size) + "px"
                                          : "object " + fs::path(s.object_file).filename().string()) +
                   ", seed " + std::to_string(s.seed) + ", noiseless";
    return sim;
}

double plan_overlap(const SimSettings& s, const ScanPlan& plan) {
    if (s.plan == "raster") return overlap_ratio(static_cast<double>(s.step), s.probe_sigma);
    if (plan.size() < 2) return 1.0;
    return overlap_ratio(mean_nearest_neighbor_spacing(plan), s.probe_sigma);
}

double auto_lambda_x(double overlap, double high_overlap_value, double low_overlap_value) {
    return overlap >= 0.5 ? high_overlap_value : low_overlap_value;
}

unsigned threads_from_env() {
    const char* v = std::getenv("PTYCHO_THREADS");
    if (v == nullptr || *v == '\0') return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) {
        throw std::invalid_argument(std::string("PTYCHO_THREADS: expected an integer in [1, 1024], got '") + v + "'");
    }
    return static_cast<unsigned>(n);
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regularized ptychography: simulate, reconstruct, evaluate"};
    app.name("ptycho");
    app.require_subcommand(1);
    Commands c;

    auto* sim = app.add_subcommand("simulate", "Simulate a noiseless dataset");
    sim->add_option("--config", "Settings file (TOML), keys mirror flag names");
    add_sim_options(sim, c.sim);
    sim->add_option("--seed", c.sim.seed, "Phantom and jitter seed")->capture_default_str();
    sim->add_option("--out", c.sim_out, "Output directory")->required();

    auto* rec = app.add_subcommand("reconstruct", "Regularized minibatch reconstruction");
    rec->add_option("--config", "Settings file (TOML), keys mirror flag names");
    rec->add_option("--data", c.data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    add_recon_options(rec, c.recon);
    c.recon_optics_flags = add_optics_options(rec, c.recon_optics);
    rec->add_option("--out", c.recon_out, "Output directory")->required();

    auto* ep = app.add_subcommand("epie", "ePIE baseline");
    ep->add_option("--config", "Settings file (TOML), keys mirror flag names");
    ep->add_option("--data", c.epie_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    ep->add_option("--sweeps", c.sweeps, "Sweep count")->capture_default_str();
    ep->add_option("--alpha", c.alpha, "Object step")->capture_default_str()->check(CLI::Range(1e-12, 1.0));
    ep->add_option("--beta", c.beta, "Probe step")->capture_default_str()->check(CLI::Range(1e-12, 1.0));
    ep->add_option("--seed", c.epie_seed, "Random seed")->capture_default_str();
    c.epie_optics_flags = add_optics_options(ep, c.epie_optics);
    ep->add_option("--out", c.epie_out, "Output directory")->required();

    auto* ev = app.add_subcommand("evaluate", "Aligned SSIM against ground truth");
    ev->add_option("--config", "Settings file (TOML), keys mirror flag names");
    ev->add_option("--recon", c.eval_recon, "Reconstruction directory or object field")->required()->check(CLI::ExistingPath);
    ev->add_option("--truth", c.eval_truth, "Simulation directory or truth field")->required()->check(CLI::ExistingPath);
    ev->add_option("--out", c.eval_out, "Output CSV")->required();

    auto* sw = app.add_subcommand("sweep", "Overlap or thinning sweep over priors");
    sw->add_option("--config", "Settings file (TOML), keys mirror flag names");
    add_sim_options(sw, c.sweep_sim, false);
    add_recon_options(sw, c.sweep_recon);
    sw->add_option("--steps", c.sweep_steps, "Raster steps")->delimiter(',')->capture_default_str()->check(CLI::PositiveNumber);
    sw->add_option("--keep", c.sweep_keep, "Fermat point counts after thinning")->delimiter(',')->check(CLI::PositiveNumber);
    sw->add_option("--priors", c.sweep_priors, "Priors: none, tv, stp, epie")
        ->delimiter(',')->capture_default_str()->check(CLI::IsMember({"none", "tv", "stp", "epie"}));
    sw->add_option("--sweeps", c.sweep_sweeps, "ePIE sweep count")->capture_default_str();
    sw->add_option("--out", c.sweep_out, "Output CSV")->required();

    try {
        args = with_config(std::move(args), app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (sim->parsed()) return do_simulate(c, out);
        if (rec->parsed()) return do_reconstruct(c, out);
        if (ep->parsed()) return do_epie(c, out);
        if (ev->parsed()) return do_evaluate(c, out);
        return do_sweep(c, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ptycho::cli
