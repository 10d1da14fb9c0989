#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "holoembed/basin.hpp"
#include "holoembed/elliptic.hpp"
#include "holoembed/pipeline.hpp"
#include "holoembed/svg.hpp"

#include <filesystem>

namespace {

using holoembed::cplx;
using holoembed::Vec2c;

cplx parse_complex(const std::string& text) {
    double re = 0.0, im = 0.0;
    if (std::sscanf(text.c_str(), "%lf,%lf", &re, &im) < 1)
        throw CLI::ValidationError("expected 're,im' but got '" + text + "'");
    return {re, im};
}

holoembed::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return holoembed::PipelineConfig{};
    return holoembed::PipelineConfig::from_file(path);
}

void apply_overrides(holoembed::PipelineConfig& cfg, const std::string& out, long long seed,
                     double density, int svg_mode) {
    if (!out.empty()) cfg.out_dir = out;
    if (seed >= 0) cfg.seed = std::uint64_t(seed);
    if (density > 0.0) cfg.density = density;
    if (svg_mode >= 0) cfg.write_svg = svg_mode != 0;
    cfg.induction.seed = cfg.seed;
}

void print_report(const holoembed::VerificationReport& report) {
    for (const auto& c : report.checks())
        std::printf("[%s] %-44s margin=%-12.6g samples=%zu%s%s\n", c.pass ? "pass" : "FAIL",
                    c.name.c_str(), c.margin, c.samples, c.note.empty() ? "" : "  ",
                    c.note.c_str());
    std::printf("%s\n", report.all_pass() ? "ALL CHECKS PASSED" : "CHECKS FAILED");
}

holoembed::JordanInput graph_square_demo(std::size_t n_surface) {
    holoembed::JordanInput input;
    for (std::size_t i = 0; i < n_surface; ++i) {
        const double r = std::sqrt((double(i) + 0.5) / double(n_surface));
        const double a = 2.399963229728653 * double(i);
        const cplx z = r * cplx(std::cos(a), std::sin(a));
        input.surface.push_back({z, z * z});
    }
    input.boundary.t0 = 0.0;
    input.boundary.t1 = 1.0;
    input.boundary.closed = true;
    input.boundary.f = [](double t) {
        const cplx z = std::polar(1.0, 2.0 * 3.14159265358979323846 * t);
        return Vec2c{z, z * z};
    };
    return input;
}

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Vec2c> load_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Vec2c> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double a = 0, b = 0, c = 0, d = 0;
        const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &c, &d);
        if (got < 2) continue;  // header or malformed row
        pts.push_back({cplx(a, b), got >= 4 ? cplx(c, d) : cplx(0.0, 0.0)});
    }
    if (pts.empty()) throw std::runtime_error("no points parsed from " + path);
    return pts;
}

holoembed::JordanInput load_surface(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open surface file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto j = nlohmann::json::parse(ss.str());
    holoembed::JordanInput input;
    for (const auto& row : j.at("surface"))
        input.surface.push_back({cplx(row.at(0).get<double>(), row.at(1).get<double>()),
                                 cplx(row.at(2).get<double>(), row.at(3).get<double>())});
    std::vector<std::pair<double, Vec2c>> samples;
    for (const auto& row : j.at("boundary"))
        samples.push_back({row.at(0).get<double>(),
                           {cplx(row.at(1).get<double>(), row.at(2).get<double>()),
                            cplx(row.at(3).get<double>(), row.at(4).get<double>())}});
    input.boundary = holoembed::interpolate_closed_curve(std::move(samples));
    return input;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"holoembed: torus embeddings, coordinate normalizations and "
                 "Fatou-Bieberbach basins at desk scale"};
    app.require_subcommand(1);

    std::string config_path, out_dir, surface_path, z_text;
    long long seed = -1;
    double density = -1.0;
    bool svg_on = false, svg_off = false;
    bool jordan_demo = false;
    std::string omega1_text = "1,0", omega2_text = "0,1";
    int truncation = 60;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--seed", seed, "RNG seed override");
        cmd->add_option("--density", density, "grid density override");
        cmd->add_flag("--svg", svg_on, "force SVG output on");
        cmd->add_flag("--no-svg", svg_off, "disable SVG output");
    };

    CLI::App* torus2 = app.add_subcommand("torus2", "two-boundary torus pipeline");
    add_common(torus2);

    CLI::App* jordan = app.add_subcommand("jordan", "Jordan-boundary normalization pipeline");
    add_common(jordan);
    jordan->add_option("--surface", surface_path, "JSON surface + boundary samples");
    jordan->add_flag("--demo", jordan_demo, "run on the built-in graph surface");

    CLI::App* basin = app.add_subcommand("basin", "inductive basin demo");
    add_common(basin);
    std::string maps_path, points_path, verdicts_path = "verdicts.csv";
    double window = 2.4;
    std::size_t raster_n = 100;
    CLI::App* trace = basin->add_subcommand("trace", "classify points under a sequence file");
    trace->add_option("--maps", maps_path, "sequence JSON ({\"maps\": [...]})")->required();
    trace->add_option("--points", points_path, "input CSV with re_z,im_z[,re_w,im_w] rows")
        ->required();
    trace->add_option("--out-csv", verdicts_path, "output verdicts CSV");
    CLI::App* raster_cmd =
        basin->add_subcommand("raster", "escape-time raster of the w = 0 slice");
    raster_cmd->add_option("--maps", maps_path, "sequence JSON")->required();
    raster_cmd->add_option("--window", window, "half-width of the raster window");
    raster_cmd->add_option("--size", raster_n, "raster resolution per axis");
    raster_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* wp = app.add_subcommand("wp", "Weierstrass function utilities");
    wp->require_subcommand(1);
    CLI::App* wp_eval = wp->add_subcommand("eval", "evaluate wp and wp' at a point");
    wp_eval->add_option("--config", config_path, "JSON run configuration");
    wp_eval->add_option("--omega1", omega1_text, "lattice period 're,im'");
    wp_eval->add_option("--omega2", omega2_text, "lattice period 're,im'");
    wp_eval->add_option("--truncation", truncation, "box truncation order");
    wp_eval->add_option("--z", z_text, "evaluation point 're,im'")->required();
    CLI::App* wp_verify = wp->add_subcommand("verify", "run the wp verification battery");
    wp_verify->add_option("--config", config_path, "JSON run configuration");
    wp_verify->add_option("--omega1", omega1_text, "lattice period 're,im'");
    wp_verify->add_option("--omega2", omega2_text, "lattice period 're,im'");
    wp_verify->add_option("--truncation", truncation, "box truncation order");
    wp_verify->add_option("--seed", seed, "RNG seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (torus2->parsed()) {
            auto cfg = load_config(config_path);
            apply_overrides(cfg, out_dir, seed, density, svg_on ? 1 : (svg_off ? 0 : -1));
            const auto art = holoembed::pipeline_torus2(cfg);
            print_report(art.report);
            return art.all_pass() ? 0 : 1;
        }
        if (jordan->parsed()) {
            auto cfg = load_config(config_path);
            apply_overrides(cfg, out_dir, seed, density, svg_on ? 1 : (svg_off ? 0 : -1));
            holoembed::JordanInput input;
            if (jordan_demo)
                input = graph_square_demo(800);
            else if (!surface_path.empty())
                input = load_surface(surface_path);
            else
                throw CLI::ValidationError("jordan needs --surface <file> or --demo");
            const auto art = holoembed::pipeline_jordan(input, cfg);
            print_report(art.report);
            return art.all_pass() ? 0 : 1;
        }
        if (basin->parsed()) {
            if (trace->parsed()) {
                const holoembed::AutoSequence seq =
                    holoembed::auto_sequence_from_json(slurp_file(maps_path));
                const auto pts = load_points_csv(points_path);
                holoembed::BasinQuery q;
                q.max_iterations = seq.size();
                std::string csv = "id,re_z,im_z,re_w,im_w,verdict,step,rate\n";
                char buf[200];
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const auto v = holoembed::basin_membership(seq, pts[i], q);
                    const char* kind =
                        v.kind == holoembed::BasinVerdict::Kind::converged ? "converged"
                        : v.kind == holoembed::BasinVerdict::Kind::escaped ? "escaped"
                                                                           : "undecided";
                    snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%s,%zu,%.17g\n",
                             i, pts[i].z.real(), pts[i].z.imag(), pts[i].w.real(),
                             pts[i].w.imag(), kind, v.step, v.rate);
                    csv += buf;
                }
                holoembed::write_text_file(verdicts_path, csv);
                std::printf("wrote %s (%zu points)\n", verdicts_path.c_str(), pts.size());
                return 0;
            }
            if (raster_cmd->parsed()) {
                const holoembed::AutoSequence seq =
                    holoembed::auto_sequence_from_json(slurp_file(maps_path));
                const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
                holoembed::EscapeRaster raster;
                raster.width = raster.height = raster_n;
                raster.x0 = raster.y0 = -window;
                raster.x1 = raster.y1 = window;
                raster.max_step = int(seq.size());
                raster.steps.resize(raster_n * raster_n, 0);
                std::string csv = "row,col,step\n";
                for (std::size_t r = 0; r < raster_n; ++r)
                    for (std::size_t c2 = 0; c2 < raster_n; ++c2) {
                        const double x = -window + 2.0 * window * (double(c2) + 0.5) / raster_n;
                        const double y = -window + 2.0 * window * (double(r) + 0.5) / raster_n;
                        Vec2c pt{cplx(x, y), 0.0};
                        int step = 0;
                        for (std::size_t j = 1; j <= seq.size(); ++j) {
                            pt = seq.map(j - 1).eval(pt);
                            if (holoembed::norm2(pt) > 4.0) {
                                step = int(j);
                                break;
                            }
                        }
                        raster.steps[r * raster_n + c2] = step;
                        csv += std::to_string(r) + "," + std::to_string(c2) + "," +
                               std::to_string(step) + "\n";
                    }
                holoembed::write_text_file(dir / "raster.csv", csv);
                holoembed::write_text_file(dir / "raster.svg", holoembed::svg_heatmap(raster));
                std::printf("wrote %s and %s\n", (dir / "raster.csv").c_str(),
                            (dir / "raster.svg").c_str());
                return 0;
            }
            auto cfg = load_config(config_path);
            apply_overrides(cfg, out_dir, seed, density, svg_on ? 1 : (svg_off ? 0 : -1));
            const auto art = holoembed::pipeline_basin_demo(cfg);
            print_report(art.report);
            return art.all_pass() ? 0 : 1;
        }
        if (wp->parsed()) {
            cplx o1 = parse_complex(omega1_text), o2 = parse_complex(omega2_text);
            std::uint64_t battery_seed = seed >= 0 ? std::uint64_t(seed) : 20240809ull;
            if (!config_path.empty()) {
                const auto cfg = holoembed::PipelineConfig::from_file(config_path);
                o1 = cfg.omega1;
                o2 = cfg.omega2;
                truncation = cfg.truncation;
                if (seed < 0) battery_seed = cfg.seed;
            }
            const holoembed::Lattice lat(o1, o2);
            if (wp_eval->parsed()) {
                const holoembed::WeierstrassP wpf(lat, truncation);
                const cplx z = parse_complex(z_text);
                const cplx value = wpf.eval(z);
                const cplx dvalue = wpf.deriv(z);
                std::printf("wp(z)  = %.17g %+.17gi\n", value.real(), value.imag());
                std::printf("wp'(z) = %.17g %+.17gi\n", dvalue.real(), dvalue.imag());
                return 0;
            }
            const auto report = holoembed::wp_verification_battery(lat, truncation, battery_seed);
            print_report(report);
            return report.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
