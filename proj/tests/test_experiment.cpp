#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ciphase/experiment.hpp"

using namespace ciphase;
namespace fs = std::filesystem;

namespace {

RunConfig small(RunMode m, InitialCase c, double horizon_fs = 3.0) {
    RunConfig cfg;
    cfg.mode = m;
    cfg.initial_case = c;
    cfg.nx = cfg.ny = 128;
    cfg.horizon_fs = horizon_fs;
    cfg.snapshot_stride_fs = 1.0;
    return cfg;
}

RunOptions in_memory() {
    RunOptions o;
    o.write_files = false;
    return o;
}

}  // namespace

TEST(Experiment, ZeroHorizonGivesSingleRecord) {
    const RunResult r = run(small(RunMode::exact, InitialCase::a, 0.0), in_memory());
    ASSERT_EQ(r.phases().size(), 1u);
    EXPECT_EQ(r.phases()[0].t_fs, 0.0);
    EXPECT_EQ(r.diagnostics.size(), 1u);
    EXPECT_TRUE(r.phases()[0].valid());
}

TEST(Experiment, FourRunsShareInitialDensity) {
    std::vector<RunResult> runs;
    for (auto m : {RunMode::exact, RunMode::bo})
        for (auto c : {InitialCase::a, InitialCase::b})
            runs.push_back(run(small(m, c, 0.0), in_memory()));
    for (const auto& r : runs) {
        ASSERT_EQ(r.final_observables.n.data.size(), runs[0].final_observables.n.data.size());
        for (std::size_t k = 0; k < r.final_observables.n.data.size(); ++k)
            EXPECT_NEAR(r.final_observables.n.data[k], runs[0].final_observables.n.data[k],
                        1e-14 * runs[0].final_observables.n.data[k] + 1e-300);
        EXPECT_EQ(r.diagnostics[0].a, runs[0].diagnostics[0].a);
    }
}

TEST(Experiment, ShortRunsHoldInvariants) {
    for (auto m : {RunMode::exact, RunMode::bo})
        for (auto c : {InitialCase::a, InitialCase::b}) {
            const RunConfig cfg = small(m, c);
            const RunResult r = run(cfg, in_memory());
            EXPECT_EQ(r.phases().size(), cfg.n_intervals() + 1);
            const double e0 = r.diagnostics.front().energy;
            for (const auto& d : r.diagnostics) {
                EXPECT_NEAR(d.norm, 1.0, 1e-10);
                EXPECT_NEAR(d.energy, e0, 1e-7);
            }
            for (const auto& p : r.phases()) {
                ASSERT_TRUE(p.valid());
                EXPECT_LT(phase_distance(p.gamma_el, p.gamma_el_pancharatnam), 0.05);
                if (m == RunMode::bo) {
                    EXPECT_LT(phase_distance(p.theta_ab, p.gamma_n), 1e-4);
                }
            }
        }
}

TEST(Experiment, Deterministic) {
    const RunResult a = run(small(RunMode::exact, InitialCase::b, 1.5), in_memory());
    const RunResult b = run(small(RunMode::exact, InitialCase::b, 1.5), in_memory());
    ASSERT_EQ(a.phases().size(), b.phases().size());
    for (std::size_t k = 0; k < a.phases().size(); ++k) {
        EXPECT_EQ(a.phases()[k].gamma_n, b.phases()[k].gamma_n);
        EXPECT_EQ(a.phases()[k].theta_ab, b.phases()[k].theta_ab);
    }
    EXPECT_EQ(a.paths[0].path.path.points, b.paths[0].path.path.points);
}

TEST(Experiment, ExtraPathsAndClosure) {
    RunConfig cfg = small(RunMode::exact, InitialCase::a, 1.0);
    cfg.closure = true;
    RunOptions o = in_memory();
    PathSpec wide = cfg.path;
    wide.half_angle = 0.5;
    o.extra_paths = {wide};
    const RunResult r = run(cfg, o);
    ASSERT_EQ(r.paths.size(), 2u);
    EXPECT_EQ(r.paths[0].closed_records.size(), r.phases().size());
    EXPECT_EQ(r.paths[1].records.size(), r.phases().size());
    EXPECT_EQ(r.paths[0].history.size(), r.phases().size());
    for (const auto& c : r.paths[0].closed_records) EXPECT_EQ(c.theta_ab, 0.0);
}

TEST(Experiment, FilesRoundTripAndRecompute) {
    const fs::path dir = fs::temp_directory_path() / "ciphase_test_run";
    fs::remove_all(dir);
    RunConfig cfg = small(RunMode::exact, InitialCase::b, 2.0);
    cfg.output_dir = dir.string();
    const RunResult r = run(cfg);
    for (const char* f : {"phases.tsv", "diagnostics.tsv", "manifest.json", "config.txt", "paths.txt"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto table = io::read_phase_table(dir / "phases.tsv");
    ASSERT_EQ(table.size(), r.phases().size());
    for (std::size_t k = 0; k < table.size(); ++k) EXPECT_EQ(table[k].gamma_n, r.phases()[k].gamma_n);
    EXPECT_EQ(io::read_path_file(dir / "paths.txt").size(), r.phases().size());

    std::ifstream ms(dir / "manifest.json");
    const auto j = nlohmann::json::parse(ms);
    EXPECT_EQ(j.at("mode"), "exact");
    EXPECT_EQ(j.at("case"), "b");
    EXPECT_EQ(format_config(parse_config(j.at("config_text").get<std::string>())), format_config(cfg));

    const auto again = recompute_phases(dir);
    ASSERT_EQ(again.size(), r.snapshots.size());
    ASSERT_GE(again.size(), 2u);
    for (const auto& a : again) {
        const PhaseRecord* match = nullptr;
        for (const auto& p : r.phases())
            if (std::abs(p.t_fs - a.t_fs) < 1e-9) match = &p;
        ASSERT_NE(match, nullptr);
        EXPECT_NEAR(a.gamma_n, match->gamma_n, 1e-12);
        EXPECT_NEAR(a.theta_ab, match->theta_ab, 1e-12);
        EXPECT_NEAR(a.gamma_el_pancharatnam, match->gamma_el_pancharatnam, 1e-12);
    }
    fs::remove_all(dir);
}

TEST(Experiment, MakePathAndBounds) {
    const RunConfig cfg;
    const AdvectedPath p = make_path(cfg.path, cfg.model());
    EXPECT_NEAR(norm(p.path.a()), cfg.model().valley_radius(), 1e-12);
    const SpacingBounds b = spacing_bounds(cfg.path, cfg.grid());
    EXPECT_DOUBLE_EQ(b.min, 0.25 * cfg.grid().dx());
    EXPECT_DOUBLE_EQ(b.max, 0.5 * cfg.grid().dx());
}
