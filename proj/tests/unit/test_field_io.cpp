#include <doctest.h>

#include <cstdio>
#include <random>
#include <sstream>

#include "ctm/errors.hpp"
#include "ctm/field_io.hpp"

using namespace ctm;

TEST_CASE("field dump round trips bit exactly") {
    Grid g(7, 5, 123.456, 7.89e4, -10.0, 3.0);
    ScalarField f(g);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (auto& v : f.values) v = dist(rng);
    f.values[3] = 1.0 / 3.0;
    f.values[4] = 1e-300;

    std::stringstream ss;
    write_field(ss, f, 86400.0);
    FieldDump back = read_field(ss);
    CHECK(back.time == 86400.0);
    CHECK(back.field.grid.nx == g.nx);
    CHECK(back.field.grid.ny == g.ny);
    CHECK(back.field.grid.dx == g.dx);
    CHECK(back.field.grid.dy == g.dy);
    REQUIRE(back.field.values.size() == f.values.size());
    for (size_t k = 0; k < f.values.size(); ++k) CHECK(back.field.values[k] == f.values[k]);
}

TEST_CASE("field dump header layout") {
    Grid g(4, 4, 1.0, 2.0);
    ScalarField f(g, 1.5);
    std::stringstream ss;
    write_field(ss, f, 0.0);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "# nx=4");
    std::getline(ss, line);
    CHECK(line == "# ny=4");
    std::getline(ss, line);
    CHECK(line.rfind("# dx=", 0) == 0);
    std::getline(ss, line);
    CHECK(line.rfind("# dy=", 0) == 0);
    std::getline(ss, line);
    CHECK(line.rfind("# time=", 0) == 0);
    int rows = 0;
    while (std::getline(ss, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("truncated dumps are rejected") {
    Grid g(4, 4, 1.0, 1.0);
    ScalarField f(g, 2.0);
    std::stringstream ss;
    write_field(ss, f, 0.0);
    std::string text = ss.str();
    std::stringstream cut(text.substr(0, text.size() - 20));
    CHECK_THROWS_AS(read_field(cut), IoError);
}

TEST_CASE("bad headers are rejected") {
    std::stringstream ss("# ny=4\n# nx=4\n");
    CHECK_THROWS_AS(read_field(ss), IoError);
}

TEST_CASE("non finite values are rejected") {
    std::stringstream ss;
    ss << "# nx=4\n# ny=4\n# dx=1\n# dy=1\n# time=0\n";
    for (int j = 0; j < 4; ++j) ss << "1 2 nan 4\n";
    CHECK_THROWS_AS(read_field(ss), IoError);
}

TEST_CASE("file level round trip") {
    Grid g(5, 4, 2.5, 3.5);
    ScalarField f(g);
    for (int k = 0; k < g.ncells(); ++k) f.values[k] = std::sin(k * 0.7) * 1e3;
    const std::string path = "io_roundtrip_test.txt";
    write_field_file(path, f, 12.5);
    FieldDump back = read_field_file(path);
    for (int k = 0; k < g.ncells(); ++k) CHECK(back.field.values[k] == f.values[k]);
    CHECK(back.time == 12.5);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_field_file(path), IoError);
}
