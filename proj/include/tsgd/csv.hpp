#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tsgd/dataset.hpp"

namespace tsgd {

/// Column layout of a CSV table: which column carries the label and which
/// carry features (all the others by default). header = nullopt means
/// auto-detect (a first row with any non-numeric cell is treated as one).
struct CsvSchema {
    std::size_t label_col = 0;
    std::vector<std::size_t> feature_cols;  // empty: every column except label_col
    std::optional<bool> header;
    Task task = Task::regression;
    std::size_t num_classes = 0;  // 0: infer as max label + 1
    long label_shift = 0;         // subtracted from raw class labels (e.g. 1-based files)
};

/// Parse a comma-separated table into a Dataset. Rows with unparseable or
/// non-finite cells fail the whole load with a row-indexed error. When the
/// file has a header row and header_out is given, the column names are
/// stored there (in file order) for faithful re-export.
Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 std::vector<std::string>* header_out = nullptr);

/// Write a dataset back out in the schema's column order, so a resampled
/// file is a drop-in replacement for the input. Atomic: the file appears
/// fully written or not at all.
void write_csv(const std::string& path, const Dataset& data, const CsvSchema& schema,
               const std::vector<std::string>& header_names = {});

/// Serialize a double with shortest round-trip formatting.
std::string format_double(double v);

/// Write `content` to `path` via a temp file and rename, so partial output
/// never lands under the final name.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace tsgd
