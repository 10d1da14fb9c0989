#include "holoembed/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "holoembed/elliptic.hpp"
#include "holoembed/errors.hpp"
#include "holoembed/rng.hpp"
#include "holoembed/svg.hpp"

namespace holoembed {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json c_to_json(cplx v) { return ordered_json::array({v.real(), v.imag()}); }

cplx c_from_json(const ordered_json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::string fmt_double(double v) {
    char buf[40];
    snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string PipelineConfig::to_json() const {
    ordered_json j;
    j["omega1"] = c_to_json(omega1);
    j["omega2"] = c_to_json(omega2);
    j["truncation"] = truncation;
    j["pole_margin"] = pole_margin;
    auto removed_j = ordered_json::array();
    for (const auto& r : removed) {
        if (const auto* d = std::get_if<TorusDisc>(&r))
            removed_j.push_back({{"kind", "disc"},
                                 {"center", c_to_json(d->center)},
                                 {"radius", d->radius}});
        else
            removed_j.push_back(
                {{"kind", "point"}, {"at", c_to_json(std::get<TorusPuncture>(r).at)}});
    }
    j["removed"] = std::move(removed_j);
    j["density"] = density;
    j["margin"] = margin;
    j["collar_radius"] = collar_radius;
    j["boundary_samples"] = boundary_samples;
    j["seed"] = seed;
    j["out"] = out_dir;
    j["svg"] = write_svg;
    j["budgets"] = {{"tangent_retries", tangents.max_retries},
                    {"tangent_draw_radius", tangents.draw_radius},
                    {"tangent_samples", tangents.samples},
                    {"mark_theta0", mark.theta0},
                    {"mark_theta_steps", mark.theta_steps},
                    {"mark_samples", mark.boundary_samples},
                    {"twist_steps", twist.amplitude_steps},
                    {"pq_samples", pq.boundary_samples},
                    {"puncture_samples", puncture.boundary_samples},
                    {"r_halvings", puncture.max_r_halvings}};
    j["tolerances"] = {{"tube_rel", mark.tube_rel},
                       {"min_separation", injectivity.min_separation},
                       {"min_regularity", hypotheses.min_regularity}};
    j["basin"] = {{"steps", basin_steps},
                  {"k_samples", basin_k_samples},
                  {"v_samples", basin_v_samples},
                  {"raster", raster_size},
                  {"delta", induction.delta},
                  {"epsilon0", induction.epsilon0},
                  {"ball_samples", induction.ball_sample_count}};
    return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    PipelineConfig cfg;
    if (j.contains("omega1")) cfg.omega1 = c_from_json(j.at("omega1"));
    if (j.contains("omega2")) cfg.omega2 = c_from_json(j.at("omega2"));
    if (j.contains("truncation")) cfg.truncation = j.at("truncation").get<int>();
    if (j.contains("pole_margin")) cfg.pole_margin = j.at("pole_margin").get<double>();
    if (j.contains("removed")) {
        for (const auto& r : j.at("removed")) {
            const std::string kind = r.at("kind").get<std::string>();
            if (kind == "disc")
                cfg.removed.push_back(
                    TorusDisc{c_from_json(r.at("center")), r.at("radius").get<double>()});
            else if (kind == "point")
                cfg.removed.push_back(TorusPuncture{c_from_json(r.at("at"))});
            else
                throw std::invalid_argument("config: unknown removed-region kind '" + kind + "'");
        }
    }
    if (j.contains("density")) cfg.density = j.at("density").get<double>();
    if (j.contains("margin")) cfg.margin = j.at("margin").get<double>();
    if (j.contains("collar_radius")) cfg.collar_radius = j.at("collar_radius").get<double>();
    if (j.contains("boundary_samples"))
        cfg.boundary_samples = j.at("boundary_samples").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("svg")) cfg.write_svg = j.at("svg").get<bool>();
    if (j.contains("budgets")) {
        const auto& b = j.at("budgets");
        if (b.contains("tangent_retries")) cfg.tangents.max_retries = b.at("tangent_retries").get<int>();
        if (b.contains("tangent_draw_radius"))
            cfg.tangents.draw_radius = b.at("tangent_draw_radius").get<double>();
        if (b.contains("tangent_samples"))
            cfg.tangents.samples = b.at("tangent_samples").get<std::size_t>();
        if (b.contains("mark_theta0")) cfg.mark.theta0 = b.at("mark_theta0").get<double>();
        if (b.contains("mark_theta_steps"))
            cfg.mark.theta_steps = b.at("mark_theta_steps").get<int>();
        if (b.contains("mark_samples"))
            cfg.mark.boundary_samples = b.at("mark_samples").get<std::size_t>();
        if (b.contains("twist_steps"))
            cfg.twist.amplitude_steps = b.at("twist_steps").get<int>();
        if (b.contains("pq_samples")) cfg.pq.boundary_samples = b.at("pq_samples").get<std::size_t>();
        if (b.contains("puncture_samples"))
            cfg.puncture.boundary_samples = b.at("puncture_samples").get<std::size_t>();
        if (b.contains("r_halvings"))
            cfg.puncture.max_r_halvings = b.at("r_halvings").get<int>();
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        if (t.contains("tube_rel")) {
            cfg.mark.tube_rel = t.at("tube_rel").get<double>();
            cfg.hypotheses.tube_rel = cfg.mark.tube_rel;
        }
        if (t.contains("min_separation"))
            cfg.injectivity.min_separation = t.at("min_separation").get<double>();
        if (t.contains("min_regularity")) {
            cfg.hypotheses.min_regularity = t.at("min_regularity").get<double>();
            cfg.mark.min_regularity = cfg.hypotheses.min_regularity;
        }
    }
    if (j.contains("basin")) {
        const auto& b = j.at("basin");
        if (b.contains("steps")) cfg.basin_steps = b.at("steps").get<std::size_t>();
        if (b.contains("k_samples")) cfg.basin_k_samples = b.at("k_samples").get<std::size_t>();
        if (b.contains("v_samples")) cfg.basin_v_samples = b.at("v_samples").get<std::size_t>();
        if (b.contains("raster")) cfg.raster_size = b.at("raster").get<std::size_t>();
        if (b.contains("delta")) cfg.induction.delta = b.at("delta").get<double>();
        if (b.contains("epsilon0")) cfg.induction.epsilon0 = b.at("epsilon0").get<double>();
        if (b.contains("ball_samples"))
            cfg.induction.ball_sample_count = b.at("ball_samples").get<std::size_t>();
    }
    cfg.twist.mark = cfg.mark;
    cfg.induction.seed = cfg.seed;
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::uint64_t PipelineConfig::hash() const {
    // where artifacts land must not change what they contain
    PipelineConfig normalized = *this;
    normalized.out_dir.clear();
    normalized.write_svg = true;
    const std::string dump = normalized.to_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string cloud_csv(std::span<const Vec2c> points) {
    std::string out = "id,re_z,im_z,re_w,im_w\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += fmt_double(points[i].z.real());
        out += ',';
        out += fmt_double(points[i].z.imag());
        out += ',';
        out += fmt_double(points[i].w.real());
        out += ',';
        out += fmt_double(points[i].w.imag());
        out += '\n';
    }
    return out;
}

ParamCurve interpolate_closed_curve(std::vector<std::pair<double, Vec2c>> samples) {
    if (samples.size() < 3)
        throw std::invalid_argument("interpolate_closed_curve: need at least 3 samples");
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const double t0 = samples.front().first;
    const double t1 = samples.back().first + (samples.back().first - t0) /
                                                 double(samples.size() - 1);
    ParamCurve out;
    out.t0 = t0;
    out.t1 = t1;
    out.closed = true;
    out.f = [samples = std::move(samples), t0, t1](double t) {
        const double span = t1 - t0;
        double u = std::fmod(t - t0, span);
        if (u < 0) u += span;
        u += t0;
        auto it = std::upper_bound(samples.begin(), samples.end(), u,
                                   [](double v, const auto& s) { return v < s.first; });
        const std::size_t hi = std::size_t(it - samples.begin()) % samples.size();
        const std::size_t lo = (hi + samples.size() - 1) % samples.size();
        const double ta = samples[lo].first;
        double tb = samples[hi].first;
        if (tb <= ta) tb += span;
        double uu = u;
        if (uu < ta) uu += span;
        const double w = (tb > ta) ? (uu - ta) / (tb - ta) : 0.0;
        return samples[lo].second + w * (samples[hi].second - samples[lo].second);
    };
    return out;
}

// ---------------------------------------------------------------------------
// shared pipeline plumbing
// ---------------------------------------------------------------------------

namespace {

struct Stage {
    std::vector<Vec2c> cloud;
    std::vector<ParamCurve> curves;
    std::vector<MarkedPoint> marked;
    std::vector<HoloMap> chain;

    void apply(const HoloMap& m) {
        for (Vec2c& x : cloud) x = m.eval(x);
        for (ParamCurve& c : curves)
            c = c.mapped([m](const Vec2c& x) { return m.eval(x); });
        for (MarkedPoint& mp : marked) mp.point = m.eval(mp.point);
        chain.push_back(m);
    }

    HoloMap chain_map() const { return HoloMap::composition(chain); }
};

double curve_argmax_abs_z(const ParamCurve& c, std::size_t n, Vec2c* at = nullptr) {
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = c.t0 + (c.t1 - c.t0) * double(i) / double(n);
        const Vec2c x = c.at(t);
        if (std::abs(x.z) > best) {
            best = std::abs(x.z);
            if (at) *at = x;
        }
    }
    return best;
}

// Tangent normalization, phase alignment, unique-max marking, translation,
// then the twist: marks one point on each of the two boundary curves and
// leaves the stage in final coordinates.
void mark_two_boundaries(Stage& stage, const PipelineConfig& cfg, VerificationReport& report) {
    const NormalizationResult c1 = normalize_tangents(stage.curves, cfg.tangents);
    stage.apply(c1.applied);
    report.merge(c1.report);

    // rotate the dominating first-boundary value onto the positive real axis
    // so the Re-max search can find it
    Vec2c top{};
    curve_argmax_abs_z(stage.curves[0], cfg.boundary_samples, &top);
    if (std::abs(top.z) == 0.0)
        throw SearchExhaustedError("mark_two_boundaries: first boundary has no pi1 mass");
    stage.apply(HoloMap::contraction(std::conj(top.z) / std::abs(top.z), 1.0));

    NormalizationResult c2 = mark_unique_max(stage.cloud, stage.curves, cfg.mark);
    if (c2.marked.at(0).boundary_index != 0)
        throw SearchExhaustedError(
            "mark_two_boundaries: unique-max marking marked the wrong boundary component");
    stage.apply(c2.applied);
    stage.marked.push_back(c2.marked[0]);
    report.merge(c2.report, "p1");

    // translate pi1(p1) to 0 so the twist fixes the marked fiber
    stage.apply(HoloMap::translation({-stage.marked[0].point.z, 0.0}));

    const TwistResult tw =
        twist_to_second_boundary(stage.cloud, stage.curves[0], stage.curves[1], cfg.twist);
    stage.apply(tw.twist);
    stage.apply(tw.align);
    stage.apply(tw.second_mark.applied);
    stage.marked.push_back(tw.second_mark.marked.at(0));
    // the twist stage reports its own unique-max marking margins for p2
    VerificationReport twist_report;
    for (const auto& c : tw.report.checks())
        if (c.name.rfind("bd2.", 0) != 0) twist_report.add(c);
    report.merge(twist_report);
    report.merge(tw.second_mark.report, "p2");
}

void write_artifacts(RunArtifacts& art, const PipelineConfig& cfg, const Stage& stage,
                     const char* pipeline_name) {
    const std::filesystem::path dir(cfg.out_dir);
    ordered_json envelope;
    envelope["pipeline"] = pipeline_name;
    char hash_hex[24];
    snprintf(hash_hex, sizeof(hash_hex), "%016llx",
             static_cast<unsigned long long>(cfg.hash()));
    envelope["config_hash"] = hash_hex;
    envelope["report"] = ordered_json::parse(art.report.to_json());
    write_text_file(dir / "report.json", envelope.dump(2) + "\n");
    art.files_written.push_back((dir / "report.json").string());

    write_text_file(dir / "cloud_final.csv", cloud_csv(art.final_cloud));
    art.files_written.push_back((dir / "cloud_final.csv").string());

    ordered_json maps;
    maps["config_hash"] = hash_hex;
    maps["chain"] = ordered_json::parse(stage.chain_map().to_json());
    write_text_file(dir / "maps.json", maps.dump(2) + "\n");
    art.files_written.push_back((dir / "maps.json").string());

    if (cfg.write_svg && !art.final_cloud.empty()) {
        std::vector<Vec2c> highlights;
        for (const auto& mp : stage.marked) highlights.push_back(mp.point);
        write_text_file(dir / "slice_z.svg",
                        svg_scatter(art.final_cloud, SvgProjection::z_plane, highlights));
        write_text_file(dir / "slice_zw.svg",
                        svg_scatter(art.final_cloud, SvgProjection::zw_real, highlights));
        art.files_written.push_back((dir / "slice_z.svg").string());
        art.files_written.push_back((dir / "slice_zw.svg").string());
    }
}

}  // namespace

RunArtifacts pipeline_torus2(const PipelineConfig& cfg) {
    if (cfg.removed.size() != 2)
        throw std::invalid_argument("pipeline_torus2: config must remove exactly 2 regions");

    const Lattice lat(cfg.omega1, cfg.omega2);
    const WeierstrassP wp(lat, cfg.truncation, cfg.pole_margin);

    // normalize region order: discs before points
    std::vector<RemovedRegion> removed = cfg.removed;
    std::stable_sort(removed.begin(), removed.end(), [](const auto& a, const auto& b) {
        return std::holds_alternative<TorusDisc>(a) && !std::holds_alternative<TorusDisc>(b);
    });
    const TorusSurface surface(lat, removed);
    const int discs = int(std::holds_alternative<TorusDisc>(removed[0])) +
                      int(std::holds_alternative<TorusDisc>(removed[1]));

    RunArtifacts art;
    Stage stage;

    // sampling always clears the removed regions by the configured margin;
    // point regions additionally clear their verification collars
    const double collar = cfg.collar_radius > 0.0 ? cfg.collar_radius : 0.5 * cfg.margin;
    std::vector<RemovedRegion> sampling_regions;
    for (const auto& r : removed) {
        if (std::holds_alternative<TorusDisc>(r))
            sampling_regions.push_back(r);
        else
            sampling_regions.push_back(
                TorusDisc{std::get<TorusPuncture>(r).at, collar});
    }
    const SampleGrid grid =
        sample_torus_minus(lat, sampling_regions, cfg.density, cfg.margin);

    try {
    std::optional<PunctureChoice> locator;
    if (discs == 1) {
        locator = puncture_max_locator(wp, surface, cfg.puncture);
        art.report.merge(locator->report);
    }
    EmbeddingMap psi = [&]() -> EmbeddingMap {
        if (discs == 2) {
            PqChoice pq = choose_pq_for_discs(wp, surface, cfg.pq);
            art.report.merge(pq.report);
            return build_embedding(wp, surface, pq.p, pq.q);
        }
        if (discs == 1)
            return build_embedding(wp, surface, locator->p_delta,
                                   std::get<TorusPuncture>(removed[1]).at);
        const cplx p = std::get<TorusPuncture>(removed[0]).at;
        const cplx q = std::get<TorusPuncture>(removed[1]).at;
        try {
            return build_embedding(wp, surface, p, q);
        } catch (const DegeneratePairError&) {
            return build_embedding_degenerate(wp, surface, p, q);
        }
    }();

    art.report.merge(verify_injectivity(psi, grid, cfg.injectivity));

    // embed the sample cloud
    stage.cloud.reserve(grid.points.size());
    for (cplx z : grid.points) stage.cloud.push_back(psi.eval(z));

    // checkpoint the wp-heavy stage outputs so later searches can be rerun
    // with bigger budgets without resampling the torus
    {
        const std::filesystem::path dir(cfg.out_dir);
        write_text_file(dir / "grid.csv", grid_csv(grid));
        write_text_file(dir / "cloud_embedded.csv", cloud_csv(stage.cloud));
        write_text_file(dir / "embedding.json", psi.to_json() + "\n");
        art.files_written.push_back((dir / "grid.csv").string());
        art.files_written.push_back((dir / "cloud_embedded.csv").string());
        art.files_written.push_back((dir / "embedding.json").string());
    }

    if (discs == 2) {
        stage.curves.push_back(psi.image_of(*surface.boundary(0)));
        stage.curves.push_back(psi.image_of(*surface.boundary(1)));
        mark_two_boundaries(stage, cfg, art.report);
    } else if (discs == 1) {
        // single boundary: the locator already certified the marked point
        const CircleCurve bd = *surface.boundary(0);
        stage.curves.push_back(psi.image_of(bd));

        // recover the locator's maximizer parameter on the circle
        const PunctureChoice& loc = *locator;
        const cplx rel = (loc.x_star - bd.center) / bd.radius;
        double t_star = std::arg(rel) / (2.0 * std::numbers::pi);
        if (t_star < 0.0) t_star += 1.0;
        MarkedPoint p1;
        p1.boundary_index = 0;
        p1.t = t_star;
        p1.point = psi.eval(loc.x_star);
        stage.marked.push_back(p1);

        // align the maximizing value with the positive real axis
        const cplx val = p1.point.z;
        stage.apply(HoloMap::contraction(std::conj(val) / std::abs(val), 1.0));

        const NormalizationResult c1 = normalize_tangents(stage.curves, cfg.tangents);
        stage.apply(c1.applied);
        art.report.merge(c1.report);
    } else {
        // two punctures: collar truncation turns them into genuine boundary
        // curves; radii are chosen so pi1 dominates on the first marked
        // collar while z w dominates on the second
        const cplx p = psi.p(), q = psi.q();
        if (psi.kind() == EmbeddingKind::generic) {
            stage.curves.push_back(psi.image_of(CircleCurve{p, collar}));
            stage.curves.push_back(psi.image_of(CircleCurve{q, 0.5 * collar}));
        } else {
            // swapped components: 1/(g_x0 - alpha) carries poles at both
            // punctures, so the radius ratio decides where pi1 peaks
            const HoloMap flip = HoloMap::linear(0.0, 1.0, 1.0, 0.0);
            const ParamCurve around_q = psi.image_of(CircleCurve{q, 0.5 * collar});
            const ParamCurve around_p = psi.image_of(CircleCurve{p, collar});
            for (Vec2c& x : stage.cloud) x = flip.eval(x);
            stage.chain.push_back(flip);
            stage.curves.push_back(
                around_q.mapped([flip](const Vec2c& x) { return flip.eval(x); }));
            stage.curves.push_back(
                around_p.mapped([flip](const Vec2c& x) { return flip.eval(x); }));
        }
        mark_two_boundaries(stage, cfg, art.report);
    }

    art.report.merge(
        verify_fiber_hypotheses(stage.cloud, stage.curves, stage.marked, cfg.hypotheses));
    } catch (const SearchExhaustedError& e) {
        art.report.add_fail("torus2.stage_exhausted", -1.0, stage.cloud.size(), Vec2c{},
                            e.what());
    }

    art.final_cloud = stage.cloud;
    art.marked = stage.marked;
    art.map_chain = stage.chain_map();
    const char* branch = discs == 2 ? "torus2.two_discs"
                         : discs == 1 ? "torus2.disc_point"
                                      : "torus2.two_points";
    write_artifacts(art, cfg, stage, branch);
    return art;
}

RunArtifacts pipeline_jordan(const JordanInput& input, const PipelineConfig& cfg) {
    RunArtifacts art;
    Stage stage;
    stage.cloud = input.surface;
    stage.curves.push_back(input.boundary);

    try {
        const NormalizationResult c1 = normalize_tangents(stage.curves, cfg.tangents);
        stage.apply(c1.applied);
        art.report.merge(c1.report);

        NormalizationResult c2 = mark_unique_max(stage.cloud, stage.curves, cfg.mark);
        stage.apply(c2.applied);
        stage.marked.push_back(c2.marked.at(0));
        art.report.merge(c2.report);

        art.report.merge(verify_fiber_hypotheses(stage.cloud, stage.curves, stage.marked,
                                                        cfg.hypotheses));
    } catch (const SearchExhaustedError& e) {
        art.report.add_fail("jordan.stage_exhausted", -1.0, stage.cloud.size(), Vec2c{},
                            e.what());
    }

    art.final_cloud = stage.cloud;
    art.marked = stage.marked;
    art.map_chain = stage.chain_map();
    write_artifacts(art, cfg, stage, "jordan");
    return art;
}

RunArtifacts pipeline_basin_demo(const PipelineConfig& cfg) {
    RunArtifacts art;

    // model scenario: disc exhaustion in the z-plane, one pi1-proper curve
    // far out (its pi1 shadow keeps shrinking under the contractions, so it
    // must start deep enough to stay separated for all requested steps)
    auto k_disc = [&](std::size_t j) {
        const double radius = 2.0 * (1.0 - std::pow(2.0, -double(j)));
        std::vector<Vec2c> pts;
        pts.reserve(cfg.basin_k_samples);
        for (std::size_t i = 0; i < cfg.basin_k_samples; ++i) {
            const double r = radius * std::sqrt((double(i) + 0.5) / double(cfg.basin_k_samples));
            const double a = 2.399963229728653 * double(i);
            pts.push_back({r * cplx(std::cos(a), std::sin(a)), 0.0});
        }
        return pts;
    };
    // each step costs one halving of the curve's pi1 shadow; this start
    // offset keeps the shadow separated from pi1(K) for the requested depth
    // while letting the expulsion constraint genuinely bind on late steps
    const double v_base = std::pow(2.0, double(cfg.basin_steps));
    std::vector<Vec2c> v_samples;
    v_samples.reserve(cfg.basin_v_samples);
    for (std::size_t i = 0; i < cfg.basin_v_samples; ++i) {
        const double t = double(i) / double(cfg.basin_v_samples - 1);
        v_samples.push_back({cplx(v_base * (1.0 + 0.25 * t), 0.0), cplx(0.3, 0.0)});
    }

    InductionState st = fb_induction_start(k_disc(1), v_samples, cfg.induction);
    art.report.add_pass("basin.step1.margin_b", st.margin_b, st.k_images.size());
    art.report.add_pass("basin.step1.margin_c", st.margin_c, st.v_images.size());

    std::string margins_csv = "step,margin_b,margin_c,pusher_degree\n";
    margins_csv += "1," + fmt_double(st.margin_b) + "," + fmt_double(st.margin_c) + ",0\n";

    for (std::size_t j = 2; j <= cfg.basin_steps; ++j) {
        int used_degree = 0;
        auto pusher = [&used_degree](const PusherRequest& req) {
            PusherResult r = model_pusher(req);
            used_degree = r.degree;
            return r;
        };
        st = fb_induction_step(st, k_disc(j), pusher);
        const std::string tag = "basin.step" + std::to_string(j);
        if (st.margin_b > 0.0)
            art.report.add_pass(tag + ".margin_b", st.margin_b, st.k_images.size());
        else
            art.report.add_fail(tag + ".margin_b", st.margin_b, st.k_images.size(), Vec2c{});
        if (st.margin_c > 0.0)
            art.report.add_pass(tag + ".margin_c", st.margin_c, st.v_images.size());
        else
            art.report.add_fail(tag + ".margin_c", st.margin_c, st.v_images.size(), Vec2c{});
        margins_csv += std::to_string(j) + "," + fmt_double(st.margin_b) + "," +
                       fmt_double(st.margin_c) + "," + std::to_string(used_degree) + "\n";
    }

    // membership of the tracked samples under the accumulated prefix
    BasinQuery query;
    query.max_iterations = st.sequence.size();
    query.convergence_radius = 0.6;
    std::size_t converged = 0;
    std::string rates_csv = "id,re_z,im_z,verdict,step,rate\n";
    const auto k1 = k_disc(1);
    for (std::size_t i = 0; i < k1.size(); ++i) {
        const BasinVerdict v = basin_membership(st.sequence, k1[i], query);
        if (v.kind == BasinVerdict::Kind::converged) ++converged;
        rates_csv += std::to_string(i) + "," + fmt_double(k1[i].z.real()) + "," +
                     fmt_double(k1[i].z.imag()) + "," +
                     (v.kind == BasinVerdict::Kind::converged   ? "converged"
                      : v.kind == BasinVerdict::Kind::escaped ? "escaped"
                                                              : "undecided") +
                     "," + std::to_string(v.step) + "," + fmt_double(v.rate) + "\n";
    }
    // short sequences leave orbits undecided rather than misclassified, so
    // count non-converged K points through the final images instead
    std::size_t k_inside = 0;
    for (const Vec2c& x : st.k_images)
        if (norm2(x) < 1.0) ++k_inside;
    if (k_inside == st.k_images.size())
        art.report.add_pass("basin.final_K_inside_ball", st.margin_b, st.k_images.size());
    else
        art.report.add_fail("basin.final_K_inside_ball", -1.0, st.k_images.size(), Vec2c{});

    std::size_t v_outside = 0;
    for (const Vec2c& x : st.v_images)
        if (norm2(x) > 1.0) ++v_outside;
    if (v_outside == st.v_images.size())
        art.report.add_pass("basin.final_V_outside_ball", st.margin_c, st.v_images.size());
    else
        art.report.add_fail("basin.final_V_outside_ball", -1.0, st.v_images.size(), Vec2c{});
    if (converged == k1.size())
        art.report.add_pass("basin.K1_converged", double(converged), k1.size());
    else
        art.report.add_fail("basin.K1_converged", double(converged) - double(k1.size()),
                            k1.size(), Vec2c{},
                            std::to_string(converged) + " of " + std::to_string(k1.size()));

    // escape-time raster of the w = 0 slice
    EscapeRaster raster;
    raster.width = raster.height = cfg.raster_size;
    raster.x0 = -2.4;
    raster.x1 = 2.4;
    raster.y0 = -2.4;
    raster.y1 = 2.4;
    raster.max_step = int(st.sequence.size());
    raster.steps.resize(raster.width * raster.height, 0);
    std::string raster_csv = "row,col,step\n";
    for (std::size_t r = 0; r < raster.height; ++r)
        for (std::size_t c = 0; c < raster.width; ++c) {
            const double x = raster.x0 + (raster.x1 - raster.x0) *
                                             (double(c) + 0.5) / double(raster.width);
            const double y = raster.y0 + (raster.y1 - raster.y0) *
                                             (double(r) + 0.5) / double(raster.height);
            Vec2c pt{cplx(x, y), 0.0};
            int step = 0;
            for (std::size_t j = 1; j <= st.sequence.size(); ++j) {
                pt = st.sequence.map(j - 1).eval(pt);
                if (norm2(pt) > 4.0) {
                    step = int(j);
                    break;
                }
            }
            raster.steps[r * raster.width + c] = step;
            raster_csv += std::to_string(r) + "," + std::to_string(c) + "," +
                          std::to_string(step) + "\n";
        }

    const std::filesystem::path dir(cfg.out_dir);
    char hash_hex[24];
    snprintf(hash_hex, sizeof(hash_hex), "%016llx",
             static_cast<unsigned long long>(cfg.hash()));
    ordered_json envelope;
    envelope["pipeline"] = "basin";
    envelope["config_hash"] = hash_hex;
    envelope["report"] = ordered_json::parse(art.report.to_json());
    write_text_file(dir / "report.json", envelope.dump(2) + "\n");
    write_text_file(dir / "margins.csv", margins_csv);
    write_text_file(dir / "rates.csv", rates_csv);
    write_text_file(dir / "raster.csv", raster_csv);
    art.files_written = {(dir / "report.json").string(), (dir / "margins.csv").string(),
                         (dir / "rates.csv").string(), (dir / "raster.csv").string()};
    if (cfg.write_svg) {
        write_text_file(dir / "raster.svg", svg_heatmap(raster));
        art.files_written.push_back((dir / "raster.svg").string());
    }

    for (const Vec2c& x : st.k_images) art.final_cloud.push_back(x);
    art.map_chain = st.sequence.prefix(st.sequence.size());
    return art;
}

VerificationReport wp_verification_battery(const Lattice& lattice, int truncation,
                                           std::uint64_t seed) {
    VerificationReport report;
    const WeierstrassP wp(lattice, truncation);
    const EllipticInvariants inv = invariants(lattice, truncation);
    Rng rng(seed);

    auto clear_point = [&]() {
        for (;;) {
            const double s = rng.uniform(-0.5, 0.5);
            const double t = rng.uniform(-0.5, 0.5);
            const cplx z = s * lattice.omega1() + t * lattice.omega2();
            if (wp.pole_distance(z) > 0.05 * lattice.systole()) return z;
        }
    };

    double worst_even = 0.0, worst_ode = 0.0;
    cplx witness_even{}, witness_ode{};
    for (int i = 0; i < 100; ++i) {
        const cplx z = clear_point();
        const cplx a = wp.eval(z), b = wp.eval(-z);
        const double even = std::abs(a - b) / std::abs(a);
        if (even > worst_even) {
            worst_even = even;
            witness_even = z;
        }
        const cplx d = wp.deriv(z);
        const cplx res = d * d - (4.0 * a * a * a - inv.g2 * a - inv.g3);
        const double rel = std::abs(res) / std::norm(d);
        if (rel > worst_ode) {
            worst_ode = rel;
            witness_ode = z;
        }
    }
    if (worst_even <= 1e-10)
        report.add_pass("wp.evenness", 1e-10 - worst_even, 100);
    else
        report.add_fail("wp.evenness", 1e-10 - worst_even, 100, Vec2c{witness_even, 0.0});
    if (worst_ode <= 1e-6)
        report.add_pass("wp.differential_equation", 1e-6 - worst_ode, 100);
    else
        report.add_fail("wp.differential_equation", 1e-6 - worst_ode, 100,
                        Vec2c{witness_ode, 0.0});

    // periodicity through the reduction, on non-reduced arguments
    double worst_per = 0.0;
    for (int i = 0; i < 32; ++i) {
        const cplx z = clear_point();
        const cplx a = wp.eval(z);
        worst_per = std::max(worst_per,
                             std::abs(wp.eval(z + lattice.omega1()) - a) / std::abs(a));
        worst_per = std::max(worst_per,
                             std::abs(wp.eval(z - lattice.omega2()) - a) / std::abs(a));
    }
    if (worst_per <= 1e-6)
        report.add_pass("wp.periodicity", 1e-6 - worst_per, 64);
    else
        report.add_fail("wp.periodicity", 1e-6 - worst_per, 64, Vec2c{});

    // two-to-one at a handful of targets plus every half-period value
    bool two_to_one = true;
    cplx bad_target{};
    for (int i = 0; i < 12 && two_to_one; ++i) {
        const cplx w = wp.eval(clear_point());
        int total = 0;
        for (const auto& pre : wp_preimages(wp, w, 1e-9)) total += pre.multiplicity;
        if (total != 2) {
            two_to_one = false;
            bad_target = w;
        }
    }
    for (const auto& hp : ramification_points(lattice)) {
        if (std::abs(hp.rep()) < 1e-12) continue;
        const cplx w = wp.eval(hp.rep());
        const auto pre = wp_preimages(wp, w, 1e-9);
        int total = 0;
        for (const auto& p : pre) total += p.multiplicity;
        if (total != 2 || pre.size() != 1) {
            two_to_one = false;
            bad_target = w;
        }
    }
    if (two_to_one)
        report.add_pass("wp.two_to_one", 2.0, 15);
    else
        report.add_fail("wp.two_to_one", 0.0, 15, Vec2c{bad_target, 0.0});

    // truncation stability: doubling N moves values below the design gate
    const WeierstrassP wp2 = wp.with_truncation(2 * truncation);
    double worst_trunc = 0.0;
    for (int i = 0; i < 16; ++i) {
        const cplx z = clear_point();
        worst_trunc =
            std::max(worst_trunc, std::abs(wp.eval(z) - wp2.eval(z)) / std::abs(wp2.eval(z)));
    }
    if (worst_trunc <= 1e-8)
        report.add_pass("wp.truncation_agreement", 1e-8 - worst_trunc, 16);
    else
        report.add_fail("wp.truncation_agreement", 1e-8 - worst_trunc, 16, Vec2c{});

    return report;
}

}  // namespace holoembed
