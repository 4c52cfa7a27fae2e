#include "branchlab/error.hpp"
#include "branchlab/io.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace branchlab;

TEST_CASE("config parsing", "[io]")
{
    std::istringstream in("# comment\nparams.theta = 12\n\nsim.h_max=0.01  # trailing\nrates.gamma_grid=0:1:0.5\n");
    const auto cfg = parse_config(in);
    CHECK(cfg.at("params.theta") == "12");
    CHECK(config_double(cfg, "sim.h_max", 0.05) == 0.01);
    CHECK(config_double(cfg, "sim.c_step", 0.05) == 0.05);
    CHECK(config_list(cfg, "rates.gamma_grid", {}) == std::vector<double>{0.0, 0.5, 1.0});

    std::istringstream bad("no equals sign here\n");
    CHECK_THROWS_AS(parse_config(bad), Error);
    CHECK_THROWS_AS(config_double({{"x", "abc"}}, "x", 0.0), Error);
    CHECK_THROWS_AS(load_config_file("/nonexistent/branchlab.cfg"), Error);
}

TEST_CASE("grids", "[io]")
{
    CHECK(parse_grid("0:2:0.5") == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK(parse_grid("1,2.5,4") == std::vector<double>{1.0, 2.5, 4.0});
    CHECK(parse_grid("0:4:0.5").size() == 9);
    CHECK_THROWS_AS(parse_grid("0:1:0"), Error);
}

TEST_CASE("manifest round trip", "[io]")
{
    Manifest m;
    m.command = "simulate";
    m.config = {{"params.theta", "10"}, {"sim.h_max", "0.050000000000000003"}, {"seed", "17"}};
    m.seed = 17;
    m.version = "0.1.0";
    m.wall_seconds = 1.25;
    m.truncated_replicas = {"replica 3"};
    const auto back = manifest_from_json(manifest_to_json(m));
    CHECK(back.command == m.command);
    CHECK(back.config == m.config);
    CHECK(back.seed == m.seed);
    CHECK(back.version == m.version);
    CHECK(back.wall_seconds == m.wall_seconds);
    CHECK(back.truncated_replicas == m.truncated_replicas);
}

TEST_CASE("CSV cells", "[io]")
{
    CHECK(format_cell(ExtReal()) == "-inf");
    CHECK(format_cell(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_cell(std::int64_t{42}) == "42");

    Table t{{"a", "b"}, {{std::string("x,y"), 1.5}}};
    std::ostringstream out;
    write_csv(out, t);
    CHECK(out.str() == "a,b\n\"x,y\",1.5\n");
}

TEST_CASE("empty report", "[io]")
{
    const Table t{{"t", "gamma", "kappa", "log_count_over_t", "theory_value"}, {}};
    std::ostringstream out;
    write_csv(out, t);
    CHECK(out.str() == "t,gamma,kappa,log_count_over_t,theory_value\n");
    CHECK(render_summary(t, {}).find("no data") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "branchlab_io_test";
    std::filesystem::create_directories(dir);
    emit_report(t, {}, dir / "r.csv", dir / "r.txt");
    std::ifstream in(dir / "r.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,gamma,kappa,log_count_over_t,theory_value");
    std::filesystem::remove_all(dir);
}
