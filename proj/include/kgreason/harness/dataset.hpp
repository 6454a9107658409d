#pragma once
// Question/answer datasets. Every supported flavor is read into the same
// record shape; the normalized flavor is the canonical on-disk form:
//   [{"id", "question", "topic_entities": [{"mid", "label"}], "answers": [...], "tag"?}]

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kgreason/planner/state.hpp"

namespace kgreason::harness {

enum class DatasetFlavor { normalized, cwq, webqsp, grailqa };

std::string_view to_string(DatasetFlavor f);
// Throws std::invalid_argument listing the valid names.
DatasetFlavor dataset_flavor_from_string(std::string_view s);
std::string valid_flavor_names();

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::size_t index, const std::string& what)
        : std::runtime_error("record " + std::to_string(index) + ": " + what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

struct DatasetRecord {
    std::string id;
    planner::Question question;
    std::vector<std::string> answers;  // gold aliases
    std::string tag;                   // optional split label

    bool operator==(const DatasetRecord& o) const;
};

struct SkippedRecord {
    std::size_t index = 0;
    std::string id;
    std::string reason;
};

struct Dataset {
    std::vector<DatasetRecord> records;
    std::vector<SkippedRecord> skipped;
};

Dataset parse_dataset(std::string_view text, DatasetFlavor flavor);
Dataset load_dataset(const std::filesystem::path& path, DatasetFlavor flavor);
void save_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

// Trim, lowercase, collapse internal whitespace.
std::string normalize_answer(std::string_view s);
bool hits_at_1(std::string_view predicted, const std::vector<std::string>& gold);

}  // namespace kgreason::harness
