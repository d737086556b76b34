#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cosetica/csv_io.hpp"
#include "cosetica/manifest.hpp"
#include "cosetica/rng.hpp"

using namespace cosetica;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cosetica_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("csv round trip is bit exact", "[csv]") {
    TempDir tmp;
    RngStream rng(9);
    Matrix m(50, 3);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 50; ++i) m(i, j) = rng.normal() * std::pow(10.0, (i % 9) - 4);
    m(0, 0) = 0.1;  // the classic shortest-round-trip stress value
    m(1, 1) = -0.0;
    m(2, 2) = 1e-300;
    const std::string path = tmp.file("data.csv");
    write_csv(path, m);
    const Matrix back = read_csv(path);
    REQUIRE(back.rows() == 50);
    REQUIRE(back.cols() == 3);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 50; ++i) {
            // bit-exact round trip, including signed zero
            REQUIRE(std::memcmp(&back(i, j), &m(i, j), sizeof(double)) == 0);
        }
}

TEST_CASE("csv format details", "[csv]") {
    TempDir tmp;
    Matrix m(2, 2);
    m << 1.0, 2.5, -3.0, 0.125;
    const std::string path = tmp.file("fmt.csv");
    write_csv(path, m);

    std::ifstream in(path, std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(contents == "c1,c2\n1,2.5\n-3,0.125\n");  // header, LF only, shortest form
}

TEST_CASE("csv reader rejects malformed input with location", "[csv]") {
    TempDir tmp;
    const auto write_text = [&](const std::string& name, const std::string& text) {
        std::ofstream out(tmp.file(name), std::ios::binary);
        out << text;
        return tmp.file(name);
    };

    try {
        read_csv(write_text("bad1.csv", "c1,c2\n1.0,oops\n"));
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        REQUIRE(e.row == 2);
        REQUIRE(e.col == 2);
    }

    // wrong field count
    REQUIRE_THROWS_AS(read_csv(write_text("bad2.csv", "c1,c2\n1.0\n")), CsvError);
    // non-finite values rejected
    REQUIRE_THROWS_AS(read_csv(write_text("bad3.csv", "c1\nnan\n")), CsvError);
    REQUIRE_THROWS_AS(read_csv(write_text("bad4.csv", "c1\ninf\n")), CsvError);
    // trailing garbage after a valid prefix
    REQUIRE_THROWS_AS(read_csv(write_text("bad5.csv", "c1\n1.5x\n")), CsvError);
    // header only
    REQUIRE_THROWS_AS(read_csv(write_text("bad6.csv", "c1,c2\n")), CsvError);
    // missing file
    REQUIRE_THROWS_AS(read_csv(tmp.file("nope.csv")), std::runtime_error);
}

TEST_CASE("csv reader tolerates CRLF and blank trailing lines", "[csv]") {
    TempDir tmp;
    std::ofstream out(tmp.file("crlf.csv"), std::ios::binary);
    out << "c1,c2\r\n1.5,2\r\n\r\n";
    out.close();
    const Matrix m = read_csv(tmp.file("crlf.csv"));
    REQUIRE(m.rows() == 1);
    REQUIRE(m(0, 0) == 1.5);
    REQUIRE(m(0, 1) == 2.0);
}

TEST_CASE("manifest json round trip", "[manifest]") {
    RunManifest m;
    m.input_path = "/data/input.csv";
    m.config.cost_case = CostCase::case2;
    m.config.tol_delta = 1e-9;
    m.config.max_iters = 77;
    m.config.damping = Damping::none;
    m.config.max_step_norm = 0.5;
    m.config.warm_start = WarmStart{250, 0.1, 4.0};
    m.config.seed = 1234;
    m.config.renormalize = true;
    m.centered = false;
    m.output_paths = {"out/unmixing.csv", "out/sources.csv"};
    m.data_checksum = 0xdeadbeefcafef00dULL;
    m.wall_time_s = 1.25;
    m.warm_steps = 250;
    m.newton_steps = 9;
    m.converged = true;
    m.final_delta_norm = 3.2e-11;
    m.final_cost = 5.4;
    m.convergence_order = 1.96;

    const RunManifest back = RunManifest::from_json(m.to_json());
    REQUIRE(back == m);
    REQUIRE(back.config.cost_case == CostCase::case2);
    REQUIRE(back.config.damping == Damping::none);
    REQUIRE(back.convergence_order.has_value());
    REQUIRE(*back.convergence_order == 1.96);
    REQUIRE_FALSE(back.failure.has_value());

    // failure and missing order survive too
    m.convergence_order.reset();
    m.failure = "channel 2 degenerate";
    const RunManifest back2 = RunManifest::from_json(m.to_json());
    REQUIRE(back2 == m);
    REQUIRE_FALSE(back2.convergence_order.has_value());
    REQUIRE(*back2.failure == "channel 2 degenerate");
}

TEST_CASE("manifest serializes to readable json", "[manifest]") {
    RunManifest m;
    m.input_path = "x.csv";
    const nlohmann::json j = m.to_json();
    REQUIRE(j.contains("config"));
    REQUIRE(j.contains("trace"));
    REQUIRE(j["tool_version"] == kToolVersion);
    REQUIRE(j["config"]["damping"] == "halving");
}

TEST_CASE("fnv1a checksum", "[manifest]") {
    // frozen reference values of 64-bit FNV-1a
    REQUIRE(fnv1a("", 0) == 0xcbf29ce484222325ULL);
    REQUIRE(fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
    REQUIRE(fnv1a("foobar", 6) == 0x85944171f73967e8ULL);

    TempDir tmp;
    std::ofstream out(tmp.file("blob.bin"), std::ios::binary);
    out << "foobar";
    out.close();
    REQUIRE(file_checksum(tmp.file("blob.bin")) == 0x85944171f73967e8ULL);
    REQUIRE_THROWS_AS(file_checksum(tmp.file("missing.bin")), std::runtime_error);
}
