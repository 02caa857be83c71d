#include "swgame/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swgame/errors.hpp"

namespace swgame {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".meta.json");
}

}  // namespace

void write_field(const std::filesystem::path& path, const ValueField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "t_index,x_index,mode,value\n";
    for (int j = 0; j <= field.time().n_steps; ++j)
        for (int k = 0; k < field.space().n; ++k)
            for (int i = 0; i < field.modes(); ++i)
                out << j << ',' << k << ',' << i + 1 << ',' << format_double(field.at(j, k, i))
                    << '\n';

    const auto& m = field.meta();
    nlohmann::ordered_json meta = {
        {"provenance", to_string(m.provenance)},
        {"modes", field.modes()},
        {"t0", field.time().t0},
        {"horizon", field.time().horizon},
        {"n_steps", field.time().n_steps},
        {"x_min", field.space().x_min},
        {"x_max", field.space().x_max},
        {"n_x", field.space().n},
        {"dt", field.time().dt()},
        {"dx", field.space().dx()},
        {"m", m.m},
        {"n", m.n},
        {"cfl_ratio", m.cfl_ratio},
        {"clamp_residual", m.clamp_residual},
        {"max_picard", m.max_picard},
    };
    std::ofstream mout(meta_path(path), std::ios::binary);
    if (!mout) throw ConfigError("cannot write " + meta_path(path).string());
    mout << meta.dump(2) << '\n';
}

ValueField read_field(const std::filesystem::path& path) {
    std::ifstream min(meta_path(path));
    if (!min) throw ConfigError("missing metadata " + meta_path(path).string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(min);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(meta_path(path).string() + ": " + e.what());
    }
    FieldMeta fm;
    TimeGrid tg;
    SpaceGrid sg;
    int modes = 0;
    try {
        fm.provenance = provenance_from_string(meta.at("provenance").get<std::string>());
        fm.m = meta.value("m", 0.0);
        fm.n = meta.value("n", 0.0);
        fm.cfl_ratio = meta.value("cfl_ratio", 0.0);
        fm.clamp_residual = meta.value("clamp_residual", 0.0);
        fm.max_picard = meta.value("max_picard", 0);
        tg = {meta.at("t0").get<double>(), meta.at("horizon").get<double>(),
              meta.at("n_steps").get<int>()};
        sg = {meta.at("x_min").get<double>(), meta.at("x_max").get<double>(),
              meta.at("n_x").get<int>()};
        modes = meta.at("modes").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(meta_path(path).string() + ": " + e.what());
    }
    ValueField field(tg, sg, modes, fm);

    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("t_index,x_index,mode,value", 0) != 0)
        throw ConfigError(path.string() + ": unexpected header '" + line + "'");
    std::size_t rows = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int j = 0, k = 0, i = 0;
        double v = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &j, &k, &i, &v) != 4 || j < 0 ||
            j > tg.n_steps || k < 0 || k >= sg.n || i < 1 || i > modes)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad row '" +
                              line + "'");
        field.at(j, k, i - 1) = v;
        ++rows;
    }
    if (rows != field.values().size())
        throw ConfigError(path.string() + ": expected " + std::to_string(field.values().size()) +
                          " rows, found " + std::to_string(rows));
    return field;
}

}  // namespace swgame
