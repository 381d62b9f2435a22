#include "ctm/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ctm {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Parses one "# key=<value>" header line.
double parse_header(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("field dump: missing header line '# " + key + "='");
    const std::string prefix = "# " + key + "=";
    if (line.rfind(prefix, 0) != 0)
        throw IoError("field dump: expected header '# " + key + "=', got '" + line + "'");
    try {
        size_t pos = 0;
        double v = std::stod(line.substr(prefix.size()), &pos);
        return v;
    } catch (const std::exception&) {
        throw IoError("field dump: cannot parse value in header '" + line + "'");
    }
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& f, double time) {
    const Grid& g = f.grid;
    os << "# nx=" << g.nx << "\n# ny=" << g.ny << "\n# dx=" << fmt17(g.dx) << "\n# dy="
       << fmt17(g.dy) << "\n# time=" << fmt17(time) << "\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) os << ' ';
            os << fmt17(f.at(i, j));
        }
        os << '\n';
    }
}

void write_field_file(const std::string& path, const ScalarField& f, double time) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_field(os, f, time);
    if (!os) throw IoError("write failed for '" + path + "'");
}

FieldDump read_field(std::istream& is) {
    const int nx = static_cast<int>(parse_header(is, "nx"));
    const int ny = static_cast<int>(parse_header(is, "ny"));
    const double dx = parse_header(is, "dx");
    const double dy = parse_header(is, "dy");
    const double time = parse_header(is, "time");
    Grid g(nx, ny, dx, dy);
    FieldDump dump{ScalarField(g), time};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double v;
            if (!(is >> v))
                throw IoError("field dump: truncated data at row " + std::to_string(j) + ", col " +
                              std::to_string(i));
            if (!std::isfinite(v))
                throw IoError("field dump: non-finite value at row " + std::to_string(j));
            dump.field.at(i, j) = v;
        }
    }
    return dump;
}

FieldDump read_field_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open field dump '" + path + "'");
    return read_field(is);
}

}  // namespace ctm
