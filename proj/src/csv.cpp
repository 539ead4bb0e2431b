#include "tsgd/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tsgd {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // Trim surrounding whitespace and stray CR from DOS line endings.
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back("");
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

[[noreturn]] void row_error(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return {buf, ptr};
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (!target.parent_path().empty()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 std::vector<std::string>* header_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);

    Dataset data;
    data.task = schema.task;
    data.name = std::filesystem::path(path).stem().string();

    std::string line;
    std::size_t line_no = 0;
    bool first_content_row = true;
    std::vector<std::size_t> feature_cols = schema.feature_cols;
    double max_label = -1.0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_fields(line);

        if (first_content_row) {
            bool is_header = false;
            if (schema.header.has_value()) {
                is_header = *schema.header;
            } else {
                for (const auto& f : fields) {
                    double tmp;
                    if (!parse_double(f, tmp)) { is_header = true; break; }
                }
            }
            if (schema.label_col >= fields.size()) {
                row_error(path, line_no, "label column " + std::to_string(schema.label_col) +
                                             " absent (row has " + std::to_string(fields.size()) +
                                             " columns)");
            }
            if (feature_cols.empty()) {
                for (std::size_t c = 0; c < fields.size(); ++c) {
                    if (c != schema.label_col) feature_cols.push_back(c);
                }
            }
            first_content_row = false;
            if (is_header) {
                if (header_out) *header_out = fields;
                continue;
            }
        }

        const std::size_t needed =
            std::max(schema.label_col, *std::max_element(feature_cols.begin(), feature_cols.end()));
        if (fields.size() <= needed) {
            row_error(path, line_no, "row has " + std::to_string(fields.size()) +
                                         " columns, need at least " + std::to_string(needed + 1));
        }

        for (std::size_t c : feature_cols) {
            double v;
            if (!parse_double(fields[c], v)) {
                row_error(path, line_no, "unparseable cell '" + fields[c] + "' in column " +
                                             std::to_string(c));
            }
            if (!std::isfinite(v)) {
                row_error(path, line_no, "non-finite value in column " + std::to_string(c));
            }
            data.features.push_back(v);
        }

        double y;
        if (!parse_double(fields[schema.label_col], y)) {
            row_error(path, line_no, "unparseable label '" + fields[schema.label_col] + "'");
        }
        if (!std::isfinite(y)) row_error(path, line_no, "non-finite label");
        if (schema.task == Task::classification) {
            y -= static_cast<double>(schema.label_shift);
            if (std::round(y) != y || y < 0) {
                row_error(path, line_no, "class label must be a non-negative integer, got '" +
                                             fields[schema.label_col] + "'");
            }
            max_label = std::max(max_label, y);
        }
        data.labels.push_back(y);
        ++data.rows;
    }

    if (data.rows == 0) throw std::runtime_error(path + ": no usable data rows");
    data.cols = feature_cols.size();
    if (schema.task == Task::classification) {
        data.num_classes = schema.num_classes > 0
                               ? schema.num_classes
                               : static_cast<std::size_t>(max_label) + 1;
    }
    validate_dataset(data);
    return data;
}

void write_csv(const std::string& path, const Dataset& data, const CsvSchema& schema,
               const std::vector<std::string>& header_names) {
    std::vector<std::size_t> feature_cols = schema.feature_cols;
    if (feature_cols.empty()) {
        for (std::size_t c = 0; c <= data.cols; ++c) {
            if (c != schema.label_col) feature_cols.push_back(c);
        }
        feature_cols.resize(data.cols);
    }
    if (feature_cols.size() != data.cols) {
        throw std::invalid_argument("schema feature columns do not match dataset width");
    }

    // Rebuild the original column order: labels at label_col, features at theirs.
    const std::size_t total = 1 + data.cols;
    std::size_t width = schema.label_col + 1;
    for (std::size_t c : feature_cols) width = std::max(width, c + 1);
    width = std::max(width, total);

    std::string out;
    out.reserve(data.rows * data.cols * 8);
    if (!header_names.empty()) {
        for (std::size_t c = 0; c < header_names.size(); ++c) {
            if (c) out += ',';
            out += header_names[c];
        }
        out += '\n';
    }
    std::vector<std::string> cells(width);
    for (std::size_t i = 0; i < data.rows; ++i) {
        std::fill(cells.begin(), cells.end(), std::string());
        auto r = data.row(i);
        double label = data.labels[i];
        if (data.task == Task::classification) label += static_cast<double>(schema.label_shift);
        cells[schema.label_col] = format_double(label);
        for (std::size_t j = 0; j < data.cols; ++j) cells[feature_cols[j]] = format_double(r[j]);
        for (std::size_t c = 0; c < width; ++c) {
            if (c) out += ',';
            out += cells[c];
        }
        out += '\n';
    }
    atomic_write_file(path, out);
}

}  // namespace tsgd
