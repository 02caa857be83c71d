#pragma once

#include <filesystem>
#include <string>

#include "swgame/value_field.hpp"

namespace swgame {

// Writes `path` as CSV (t_index,x_index,mode,value; mode one-based, values
// printed with %.17g) and `path` + ".meta.json" describing grid and provenance.
void write_field(const std::filesystem::path& path, const ValueField& field);

// Reads a field written by write_field. Throws ConfigError on malformed input.
ValueField read_field(const std::filesystem::path& path);

// Deterministic %.17g formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace swgame
