#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace heislab {

// Insertion-ordered JSON keeps artifacts byte-stable.
using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form.
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& fields);
    void row(std::initializer_list<std::string> fields) { row(std::vector<std::string>(fields)); }

private:
    std::ostream& os_;
};

// RFC 4180 field quoting.
std::string csv_escape(std::string_view field);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex_digest(std::uint64_t h);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string dump_json(const Json& j);

}  // namespace heislab
