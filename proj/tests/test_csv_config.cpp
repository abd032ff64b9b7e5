#include <doctest.h>

#include "vollab/csv.hpp"
#include "vollab/dates.hpp"
#include "vollab/errors.hpp"
#include "vollab/runconfig.hpp"
#include "test_util.hpp"

#include <fstream>
#include <string>

using namespace vollab;

TEST_CASE("dates parse and format ISO-8601") {
    const Date d = Date::parse("2016-05-02");
    CHECK(d.to_string() == "2016-05-02");
    CHECK(Date::parse("2016-02-29").to_string() == "2016-02-29"); // leap year
    CHECK_THROWS_AS(Date::parse("2017-02-29"), DataError);
    CHECK_THROWS_AS(Date::parse("2016-13-01"), DataError);
    CHECK_THROWS_AS(Date::parse("20160502"), DataError);
    CHECK_THROWS_AS(Date::parse("2016-5-2"), DataError);
}

TEST_CASE("date arithmetic and ACT/365") {
    const Date a = Date::parse("2016-05-02");
    const Date b = Date::parse("2017-05-02");
    CHECK(b - a == 365);
    CHECK(year_fraction(a, b) == 1.0);
    CHECK((a + 30) - a == 30);
    CHECK(a < b);
}

TEST_CASE("csv reads tables and skips provenance comments") {
    const auto t = csv::Table::from_string("# provenance line\na,b\n1,2\n3,4\n");
    CHECK(t.header() == std::vector<std::string>{"a", "b"});
    CHECK(t.n_rows() == 2);
    CHECK(t.number(0, t.column("a")) == 1.0);
    CHECK(t.number(1, t.column("b")) == 4.0);
}

TEST_CASE("csv schema violations carry file, line and column") {
    CHECK_THROWS_AS(csv::Table::from_string(""), DataError);
    try {
        const auto t = csv::Table::from_string("a,b\n1,2,3\n", "bad.csv");
        FAIL("expected column-count error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.csv:2") != std::string::npos);
    }
    try {
        const auto t = csv::Table::from_string("a,b\n1,x\n", "bad.csv");
        (void)t.number(0, t.column("b"));
        FAIL("expected number parse error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.csv:2") != std::string::npos);
        CHECK(msg.find("'b'") != std::string::npos);
    }
    const auto t = csv::Table::from_string("a,b\n1,2\n");
    CHECK_THROWS_AS((void)t.column("missing"), DataError);
}

TEST_CASE("csv writer round-trips doubles at 1e-12") {
    const double values[] = {1.0, -0.333333333333, 27.950823746, 1e-9, 12345.6789};
    for (double v : values) {
        const std::string s = csv::Writer::format(v);
        CHECK(std::stod(s) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("csv writer produces readable files") {
    testutil::TempDir dir("csv");
    {
        csv::Writer w(dir.path("t.csv"));
        w.comment("prov");
        w.row({"date", "x"});
        w.row({"2016-05-02", csv::Writer::format(1.5)});
    }
    const auto t = csv::Table::read_file(dir.path("t.csv"));
    CHECK(t.n_rows() == 1);
    CHECK(t.date(0, 0).to_string() == "2016-05-02");
    CHECK(t.number(0, 1) == 1.5);
}

TEST_CASE("run config round-trips losslessly") {
    RunConfig cfg;
    cfg.data_dir = "some/dir";
    cfg.out_dir = "out/dir";
    cfg.calib_file = "x.csv";
    cfg.seed = 1234567890123ULL;
    cfg.threads = 3;
    cfg.w_sigma = 9999.5;
    cfg.w_idx = 2.25;
    cfg.future_grid_nodes = 54321;
    cfg.mc_paths = 2500000;
    cfg.mc_steps = 777;
    cfg.gen_days = 123;
    cfg.gen_effect = 0.123456789012345;
    cfg.gen_noise = 1e-7;
    cfg.test_fraction = 0.31;
    cfg.cv_folds = 7;
    cfg.forest_trees = 99;
    cfg.importance_repeats = 13;
    cfg.lasso_alphas = 55;
    const RunConfig back = RunConfig::parse(cfg.serialize());
    CHECK(back.serialize() == cfg.serialize());
    CHECK(back.hash() == cfg.hash());
    CHECK(back.gen_effect == cfg.gen_effect);
    CHECK(back.seed == cfg.seed);
}

TEST_CASE("run config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(RunConfig::parse("nonsense=1\n"), ValidationError);
    CHECK_THROWS_AS(RunConfig::parse("seed=abc\n"), ValidationError);
    CHECK_THROWS_AS(RunConfig::parse("just a line\n"), ValidationError);
}

TEST_CASE("config hash reacts to any field change") {
    RunConfig a;
    RunConfig b;
    b.seed = 1;
    CHECK(a.hash() != b.hash());
    RunConfig c;
    c.w_idx = 2.0000001;
    CHECK(a.hash() != c.hash());
}

TEST_CASE("provenance line carries seed and config hash") {
    RunConfig cfg;
    cfg.seed = 17;
    const std::string p = cfg.provenance("gen");
    CHECK(p.find("vollab") != std::string::npos);
    CHECK(p.find("gen") != std::string::npos);
    CHECK(p.find("seed=17") != std::string::npos);
    CHECK(p.find("config=") != std::string::npos);
}
