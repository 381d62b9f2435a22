#pragma once
#include <iosfwd>
#include <string>

#include "ctm/grid.hpp"

namespace ctm {

// Field dump text format:
//   # nx=<int>
//   # ny=<int>
//   # dx=<real>
//   # dy=<real>
//   # time=<real seconds>
// followed by ny lines of nx whitespace-separated values, south row first,
// 17 significant digits (doubles round-trip exactly).
struct FieldDump {
    ScalarField field;
    double time = 0.0;
};

void write_field(std::ostream& os, const ScalarField& f, double time);
void write_field_file(const std::string& path, const ScalarField& f, double time);

FieldDump read_field(std::istream& is);
FieldDump read_field_file(const std::string& path);

}  // namespace ctm
