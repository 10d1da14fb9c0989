#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "holoembed/basin.hpp"
#include "holoembed/embedding.hpp"
#include "holoembed/normalize.hpp"
#include "holoembed/report.hpp"
#include "holoembed/surface.hpp"

namespace holoembed {

/// End-to-end run configuration. A fixed seed makes reports and figures
/// byte-identical across runs.
struct PipelineConfig {
    cplx omega1{1.0, 0.0};
    cplx omega2{0.0, 1.0};
    int truncation = 60;
    double pole_margin = -1.0;  // < 0: 1e-3 * systole
    std::vector<RemovedRegion> removed;

    double density = 0.01;       // grid step in lattice coordinates
    double margin = 0.04;        // exclusion margin around poles and removed regions
    double collar_radius = -1.0; // two-points branch; < 0: equal to margin
    std::size_t boundary_samples = 2048;

    std::uint64_t seed = 20240809;
    std::string out_dir = "out";
    bool write_svg = true;

    TangentOptions tangents;
    MarkMaxOptions mark;
    TwistOptions twist;
    PqOptions pq;
    PunctureOptions puncture;
    InjectivityOptions injectivity;
    HypothesesOptions hypotheses;

    std::size_t basin_steps = 5;
    std::size_t basin_k_samples = 160;
    std::size_t basin_v_samples = 160;
    std::size_t raster_size = 100;
    InductionOptions induction;

    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig from_file(const std::filesystem::path& path);
    std::string to_json() const;

    /// FNV-1a hash of the canonical JSON dump; stamped into every report.
    std::uint64_t hash() const;
};

/// Everything a pipeline run leaves behind.
struct RunArtifacts {
    VerificationReport report;
    HoloMap map_chain;               // composition applied after the embedding
    std::vector<Vec2c> final_cloud;
    std::vector<MarkedPoint> marked;
    std::vector<std::string> files_written;

    bool all_pass() const { return report.all_pass(); }
};

/// The two-boundary torus construction. Dispatches on the removed-region
/// kinds (two points / two discs / disc + point), builds and verifies the
/// embedding, normalizes coordinates, marks the boundary points and writes all
/// artifacts under cfg.out_dir.
RunArtifacts pipeline_torus2(const PipelineConfig& cfg);

struct JordanInput {
    std::vector<Vec2c> surface;
    ParamCurve boundary;
};

/// The single-Jordan-curve pipeline: tangent normalization, unique-max
/// marking, hypothesis verification.
RunArtifacts pipeline_jordan(const JordanInput& input, const PipelineConfig& cfg);

/// The inductive basin construction on the model scenario (disc exhaustion in
/// the z-plane against one pi1-proper curve), with per-step margins, an
/// escape-time raster and convergence-rate table.
RunArtifacts pipeline_basin_demo(const PipelineConfig& cfg);

/// The wp verification battery behind `holoembed wp verify`.
VerificationReport wp_verification_battery(const Lattice& lattice, int truncation,
                                           std::uint64_t seed);

/// Piecewise-linear closed curve through time-sorted samples (file inputs).
ParamCurve interpolate_closed_curve(std::vector<std::pair<double, Vec2c>> samples);

/// CSV with the fixed column set (id, re_z, im_z, re_w, im_w).
std::string cloud_csv(std::span<const Vec2c> points);

}  // namespace holoembed
