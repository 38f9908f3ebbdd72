#pragma once

#include "gms/model.hpp"
#include "gms/transforms.hpp"

#include <string>
#include <vector>

namespace gms {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Format with 17 significant digits so CSV round-trips bit-exactly.
std::string format_double(double v);

/// Model definition file: {"d", "m", "specialization", parameters...} or
/// tabulated alpha / gamma_root samples with piecewise_linear interpolation.
ProcessModel load_model(const std::string& path);
std::string model_to_json(const ProcessModel& model);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
/// Same rows as an array of JSON objects (the --format json mirror).
void write_json_rows(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Resolved run configuration written next to every output file.
void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const std::vector<std::pair<std::string, std::string>>& entries);

/// Long-format path table: path_id,t,i,x_i.
CsvTable paths_to_table(const std::vector<SamplePath>& paths);
/// Read one path's grid values back (path_id selects among many).
std::vector<Vec> table_to_grid(const CsvTable& table, int dim, std::int64_t path_id,
                               std::vector<double>* times_out = nullptr);

}  // namespace gms
