#include "seqmed/io.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace seqmed {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_numeric_fields(std::string_view line, const std::string& source, long row) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        std::string_view field = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        if (first == std::string_view::npos) {
            throw std::runtime_error(source + ": row " + std::to_string(row) + " has an empty field");
        }
        field = field.substr(first, last - first + 1);
        if (!field.empty() && field.front() == '+') field.remove_prefix(1);
        double value = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
            throw std::runtime_error(source + ": row " + std::to_string(row) + " has non-numeric field '" +
                                     std::string(field) + "'");
        }
        out.push_back(value);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ostringstream suffix;
    suffix << ".tmp." << std::this_thread::get_id() << '.' << counter++;
    std::filesystem::path tmp = path;
    tmp += suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace seqmed
