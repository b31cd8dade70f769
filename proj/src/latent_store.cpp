#include "ganalyzer/latent_store.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace ganalyzer {

namespace {

constexpr char kMagic[4] = {'G', 'N', 'L', 'Z'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

// Bounds-checked little-endian cursor over a loaded file image.
struct Cursor {
    const unsigned char* p;
    std::size_t size;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > size)
            throw IoError(std::string("truncated payload: unexpected end of file in ") + what);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

std::string load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open \"" + path.string() + "\" for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on \"" + path.string() + "\"");
    return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    const auto tmp = path.parent_path() /
                     (path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open \"" + tmp.string() + "\" for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError("write failure on \"" + tmp.string() + "\"");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename temp file onto \"" + path.string() + "\": " + ec.message());
    }
}

} // namespace

std::optional<std::size_t> LatentStore::index_of(std::uint64_t id) const {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

void LatentStore::append(std::uint64_t id, std::span<const double> v) {
    if (v.size() != dimension)
        throw ValidationError("record dimension mismatch: got " + std::to_string(v.size()) +
                              ", store has d=" + std::to_string(dimension));
    if (!ids.empty() && id <= ids.back())
        throw ValidationError("record ids must be strictly increasing");
    for (double x : v)
        if (!std::isfinite(x)) throw ValidationError("non-finite component in record");
    ids.push_back(id);
    data.insert(data.end(), v.begin(), v.end());
}

void LatentStore::validate() const {
    if (dimension < 1 || dimension > kMaxDimension)
        throw ValidationError("store dimension out of range [1, 65536]");
    if (data.size() != ids.size() * dimension)
        throw ValidationError("store payload size inconsistent with count and dimension");
    for (std::size_t i = 1; i < ids.size(); ++i)
        if (ids[i] <= ids[i - 1])
            throw ValidationError("record ids must be strictly increasing");
    for (double x : data)
        if (!std::isfinite(x)) throw ValidationError("non-finite component in store");
    if (!manifest.is_object()) throw ValidationError("manifest must be a JSON object");
}

void write_store(const std::filesystem::path& path, const LatentStore& store) {
    store.validate();

    std::string out;
    out.reserve(24 + store.count() * (8 + store.dimension * 8ULL) + 256);
    out.append(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, store.dimension);
    put_u64(out, store.count());
    for (std::size_t i = 0; i < store.count(); ++i) {
        put_u64(out, store.ids[i]);
        for (double x : store.vec(i)) put_f64(out, x);
    }
    const std::string manifest = store.manifest.dump();
    put_u32(out, static_cast<std::uint32_t>(manifest.size()));
    out += manifest;

    write_file_atomic(path, out);
}

LatentStore read_store(const std::filesystem::path& path) {
    const std::string bytes = load_file(path);
    Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()};

    cur.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("bad magic: not a latent store file");
    cur.pos = 4;

    const std::uint32_t version = cur.u32("version");
    if (version != kFormatVersion)
        throw IoError("unsupported store format version " + std::to_string(version));

    LatentStore store;
    store.dimension = cur.u32("dimension");
    if (store.dimension < 1 || store.dimension > kMaxDimension)
        throw ValidationError("store dimension out of range [1, 65536]");

    const std::uint64_t count = cur.u64("count");
    store.ids.reserve(count);
    store.data.reserve(count * store.dimension);
    std::uint64_t prev_id = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t id = cur.u64("record id");
        if (i > 0 && id <= prev_id)
            throw ValidationError("record ids must be strictly increasing");
        prev_id = id;
        store.ids.push_back(id);
        for (std::uint32_t j = 0; j < store.dimension; ++j) {
            const double x = cur.f64("record payload");
            if (!std::isfinite(x))
                throw ValidationError("non-finite value in record " + std::to_string(id));
            store.data.push_back(x);
        }
    }

    const std::uint32_t manifest_len = cur.u32("manifest length");
    cur.need(manifest_len, "manifest");
    const std::string manifest(bytes.data() + cur.pos, manifest_len);
    cur.pos += manifest_len;
    if (cur.pos != cur.size) throw IoError("trailing bytes after manifest");

    store.manifest = nlohmann::json::parse(manifest, nullptr, false);
    if (store.manifest.is_discarded() || !store.manifest.is_object())
        throw IoError("bad manifest JSON");

    return store;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

// One CSV field; strips surrounding quotes and a UTF-8 BOM on the first field.
std::optional<double> parse_field(std::string_view field) {
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
        field = field.substr(1, field.size() - 2);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

} // namespace

LatentStore import_csv(const std::filesystem::path& path, std::uint32_t dimension) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw ValidationError("dimension out of range [1, 65536]");

    const std::string content = load_file(path);
    LatentStore store;
    store.dimension = dimension;

    std::vector<std::string_view> lines;
    {
        std::string_view rest(content);
        if (rest.size() >= 3 && rest.substr(0, 3) == "\xEF\xBB\xBF") rest.remove_prefix(3);
        while (!rest.empty()) {
            const std::size_t nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
    }
    if (lines.empty()) return store;

    // Header detection: a first line that does not parse entirely as numbers.
    bool has_header = false;
    bool has_id_column = false;
    {
        const auto fields = split_line(lines[0]);
        for (const auto& f : fields)
            if (!parse_field(f)) {
                has_header = true;
                break;
            }
        if (has_header && !fields.empty()) {
            std::string_view first = fields[0];
            if (first.size() >= 2 && first.front() == '"' && first.back() == '"')
                first = first.substr(1, first.size() - 2);
            has_id_column = (first == "id");
            const std::size_t value_cols = fields.size() - (has_id_column ? 1 : 0);
            if (value_cols != dimension)
                throw ValidationError("header declares " + std::to_string(value_cols) +
                                      " value columns, expected " + std::to_string(dimension));
        }
    }

    std::uint64_t next_id = 0;
    std::vector<double> row(dimension);
    for (std::size_t li = has_header ? 1 : 0; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const auto fields = split_line(lines[li]);
        const std::size_t expected = dimension + (has_id_column ? 1 : 0);
        if (fields.size() != expected)
            throw ValidationError("row " + std::to_string(li + 1) + ": expected " +
                                  std::to_string(expected) + " fields, got " +
                                  std::to_string(fields.size()));

        std::uint64_t id = next_id;
        std::size_t offset = 0;
        if (has_id_column) {
            std::string_view f = fields[0];
            if (f.size() >= 2 && f.front() == '"' && f.back() == '"')
                f = f.substr(1, f.size() - 2);
            std::uint64_t parsed = 0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), parsed);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
                throw ValidationError("row " + std::to_string(li + 1) + ": unparsable id \"" +
                                      std::string(f) + "\"");
            id = parsed;
            offset = 1;
        }
        for (std::size_t j = 0; j < dimension; ++j) {
            const auto v = parse_field(fields[j + offset]);
            if (!v)
                throw ValidationError("row " + std::to_string(li + 1) + ": unparsable number \"" +
                                      std::string(fields[j + offset]) + "\"");
            row[j] = *v;
        }
        store.append(id, row);
        next_id = id + 1;
    }
    store.manifest["source"] = "csv:" + path.filename().string();
    return store;
}

void export_csv(const LatentStore& store, const std::filesystem::path& path) {
    store.validate();
    std::string out;
    out += "id";
    for (std::uint32_t j = 0; j < store.dimension; ++j) out += ",c" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < store.count(); ++i) {
        out += std::to_string(store.ids[i]);
        for (double x : store.vec(i)) {
            out += ',';
            out += format_double(x);
        }
        out += "\n";
    }
    write_file_atomic(path, out);
}

} // namespace ganalyzer
