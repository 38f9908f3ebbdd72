#include "gms/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gms {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

Mat json_to_matrix(const json& j, int rows, int cols, const std::string& what) {
    if (j.is_number()) {
        if (rows != 1 || cols != 1) throw InputError(what + ": expected a matrix");
        return Mat::Constant(1, 1, j.get<double>());
    }
    if (!j.is_array() || int(j.size()) != rows)
        throw InputError(what + ": expected " + std::to_string(rows) + " rows");
    Mat out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || int(row.size()) != cols)
            throw InputError(what + ": expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) out(i, c) = row[c].get<double>();
    }
    return out;
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

ProcessModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("model file " + path + " is not valid JSON: " + e.what());
    }
    const int d = j.value("d", 1);
    const int m = j.value("m", d);
    const Specialization spec = specialization_from_string(j.value("specialization", "generic"));
    switch (spec) {
        case Specialization::wiener_1d:
            return make_wiener_1d();
        case Specialization::ou_constant_1d:
            return make_ou_1d(j.at("alpha").get<double>(), j.value("gamma", 1.0));
        case Specialization::rotation:
            return make_rotation(json_to_matrix(j.at("alpha"), d, d, "rotation alpha"),
                                 j.value("sigma2", 1.0));
        case Specialization::integrated_wiener:
            return make_integrated_wiener(d);
        case Specialization::generic:
        default: {
            if (!j.contains("alpha_samples") || !j.contains("gamma_root_samples"))
                throw InputError("generic model needs alpha_samples and gamma_root_samples");
            if (j.value("interpolation", "piecewise_linear") != "piecewise_linear")
                throw InputError("only piecewise_linear interpolation is supported");
            const json& as = j["alpha_samples"];
            const json& gs = j["gamma_root_samples"];
            std::vector<double> times = as.at("times").get<std::vector<double>>();
            if (gs.at("times").get<std::vector<double>>() != times)
                throw InputError("alpha and gamma_root samples must share times");
            std::vector<Mat> alpha_v, gamma_v;
            for (const json& row : as.at("values"))
                alpha_v.push_back(json_to_matrix(row, d, d, "alpha sample"));
            for (const json& row : gs.at("values"))
                gamma_v.push_back(json_to_matrix(row, d, m, "gamma_root sample"));
            return make_tabulated(d, m, std::move(times), std::move(alpha_v),
                                  std::move(gamma_v));
        }
    }
}

std::string model_to_json(const ProcessModel& model) {
    json j;
    j["d"] = model.d;
    j["m"] = model.m;
    j["specialization"] = to_string(model.specialization);
    switch (model.specialization) {
        case Specialization::ou_constant_1d:
            j["alpha"] = model.ou_alpha;
            j["gamma"] = model.ou_gamma;
            break;
        case Specialization::rotation:
            j["alpha"] = matrix_to_json(model.rot_alpha);
            j["sigma2"] = model.rot_sigma2;
            break;
        default:
            break;
    }
    return j.dump(2);
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

void write_json_rows(const std::string& path, const CsvTable& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json obj;
        for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i) {
            // Numbers stay numbers in the JSON mirror.
            try {
                std::size_t used = 0;
                const double v = std::stod(row[i], &used);
                if (used == row[i].size()) {
                    obj[table.header[i]] = v;
                    continue;
                }
            } catch (...) {
            }
            obj[table.header[i]] = row[i];
        }
        rows.push_back(obj);
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << rows.dump(2) << "\n";
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw InputError("empty CSV: " + path);
    return table;
}

void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    json j;
    j["tool"] = "gms";
    j["version"] = kLibraryVersion;
    j["subcommand"] = subcommand;
    for (const auto& [key, value] : entries) j["config"][key] = value;
    std::ofstream out(out_path + ".manifest.json");
    if (!out) throw InputError("cannot write manifest for: " + out_path);
    out << j.dump(2) << "\n";
}

CsvTable paths_to_table(const std::vector<SamplePath>& paths) {
    CsvTable table;
    table.header = {"path_id", "t", "i", "x_i"};
    for (std::size_t id = 0; id < paths.size(); ++id)
        for (std::size_t p = 0; p < paths[id].times.size(); ++p)
            for (int i = 0; i < paths[id].values[p].size(); ++i)
                table.rows.push_back({std::to_string(id), format_double(paths[id].times[p]),
                                      std::to_string(i),
                                      format_double(paths[id].values[p][i])});
    return table;
}

std::vector<Vec> table_to_grid(const CsvTable& table, int dim, std::int64_t path_id,
                               std::vector<double>* times_out) {
    std::size_t col_id = std::size_t(-1), col_t = std::size_t(-1), col_i = std::size_t(-1),
                col_x = std::size_t(-1);
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == "path_id") col_id = c;
        if (table.header[c] == "t") col_t = c;
        if (table.header[c] == "i") col_i = c;
        if (table.header[c] == "x_i") col_x = c;
    }
    if (col_t == std::size_t(-1) || col_x == std::size_t(-1))
        throw InputError("path CSV needs columns t and x_i");

    std::vector<double> times;
    std::vector<Vec> values;
    for (const auto& row : table.rows) {
        if (col_id != std::size_t(-1) && std::stoll(row[col_id]) != path_id) continue;
        const double t = std::stod(row[col_t]);
        const int i = col_i == std::size_t(-1) ? 0 : std::stoi(row[col_i]);
        auto it = std::find(times.begin(), times.end(), t);
        std::size_t idx;
        if (it == times.end()) {
            times.push_back(t);
            values.push_back(Vec::Zero(dim));
            idx = times.size() - 1;
        } else {
            idx = std::size_t(it - times.begin());
        }
        if (i < 0 || i >= dim) throw InputError("component index outside model dimension");
        values[idx][i] = std::stod(row[col_x]);
    }
    if (values.empty()) throw InputError("no rows for requested path_id");
    // Sort by time.
    std::vector<std::size_t> perm(times.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        return times[a] < times[b];
    });
    std::vector<double> st(times.size());
    std::vector<Vec> sv(values.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        st[i] = times[perm[i]];
        sv[i] = values[perm[i]];
    }
    if (times_out) *times_out = st;
    return sv;
}

}  // namespace gms
