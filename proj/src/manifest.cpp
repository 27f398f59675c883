#include "osbench/data.hpp"

#include "osbench/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace osbench {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kFeatureMagic = {'O', 'S', 'F', 'V'};

void put_u32(std::ostream& out, std::uint32_t v)
{
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const fs::path& path)
{
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw InputError("truncated feature file " + path.string());
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8)
           | (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

long long parse_int(std::string_view s, const std::string& what)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InputError("invalid integer for " + what + ": '" + std::string(s) + "'");
    return v;
}

float parse_float(std::string_view s, const fs::path& path)
{
    const std::string text(s);
    char* end = nullptr;
    const float v = std::strtof(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        throw InputError("invalid number '" + text + "' in " + path.string());
    return v;
}

FeatureFormat parse_format(std::string_view s)
{
    if (s == "osfv")
        return FeatureFormat::Osfv;
    if (s == "csv")
        return FeatureFormat::Csv;
    throw InputError("unknown feature format '" + std::string(s) + "'");
}

} // namespace

FeatureTable read_feature_file(const fs::path& path, FeatureFormat format)
{
    if (format == FeatureFormat::Osfv) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw InputError("cannot open feature file " + path.string());
        std::array<char, 4> magic{};
        if (!in.read(magic.data(), 4) || magic != kFeatureMagic)
            throw InputError("bad magic in feature file " + path.string());
        FeatureTable table;
        table.dim = get_u32(in, path);
        const std::uint32_t count = get_u32(in, path);
        table.rows.assign(count, std::vector<float>(table.dim));
        for (auto& row : table.rows) {
            for (auto& value : row) {
                const std::uint32_t bits = get_u32(in, path);
                value = std::bit_cast<float>(bits);
            }
        }
        return table;
    }

    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open feature file " + path.string());
    FeatureTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        std::vector<float> row;
        for (auto field : split(line, ','))
            row.push_back(parse_float(field, path));
        if (first) {
            table.dim = static_cast<std::uint32_t>(row.size());
            first = false;
        } else if (row.size() != table.dim) {
            throw InputError("ragged rows in CSV feature file " + path.string());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_feature_file(const fs::path& path, const FeatureTable& table, FeatureFormat format)
{
    if (format == FeatureFormat::Osfv) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + path.string());
        out.write(kFeatureMagic.data(), 4);
        put_u32(out, table.dim);
        put_u32(out, static_cast<std::uint32_t>(table.rows.size()));
        for (const auto& row : table.rows) {
            if (row.size() != table.dim)
                throw InputError("feature row length differs from declared dimension");
            for (float v : row)
                put_u32(out, std::bit_cast<std::uint32_t>(v));
        }
        if (!out)
            throw Error("failed writing " + path.string());
        return;
    }

    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    char buffer[32];
    for (const auto& row : table.rows) {
        if (row.size() != table.dim)
            throw InputError("feature row length differs from declared dimension");
        for (std::size_t i = 0; i < row.size(); ++i) {
            // %.9g round-trips every float exactly.
            std::snprintf(buffer, sizeof buffer, "%.9g", static_cast<double>(row[i]));
            out << (i ? "," : "") << buffer;
        }
        out << '\n';
    }
}

Dataset load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open manifest " + path.string());

    std::string feature_name;
    FeatureFormat format = FeatureFormat::Osfv;
    long long dim = -1;
    std::set<std::string> declared_classes;
    bool has_class_list = false;

    struct Record {
        std::string image_id;
        int patch_index;
        std::string class_name;
        long long row;
    };
    std::vector<Record> records;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        const auto eq = text.find('=');
        if (eq != std::string_view::npos && text.find(',') > eq) {
            const auto key = trim(text.substr(0, eq));
            const auto value = trim(text.substr(eq + 1));
            if (key == "feature_file")
                feature_name = std::string(value);
            else if (key == "format")
                format = parse_format(value);
            else if (key == "dim")
                dim = parse_int(value, "dim");
            else if (key == "classes") {
                has_class_list = true;
                if (!value.empty())
                    for (auto name : split(value, ','))
                        declared_classes.emplace(name);
            } else
                throw InputError(path.string() + ":" + std::to_string(line_no) + ": unknown header key '"
                                 + std::string(key) + "'");
            continue;
        }
        const auto fields = split(text, ',');
        if (fields.size() != 4)
            throw InputError(path.string() + ":" + std::to_string(line_no)
                             + ": expected image_id,patch_index,class_name,row_index");
        records.push_back({std::string(fields[0]), static_cast<int>(parse_int(fields[1], "patch_index")),
                           std::string(fields[2]), parse_int(fields[3], "row_index")});
    }

    if (feature_name.empty())
        throw InputError("manifest " + path.string() + " does not name a feature_file");
    if (dim < 0)
        throw InputError("manifest " + path.string() + " does not declare dim");

    const fs::path feature_path = path.parent_path() / feature_name;
    if (!fs::exists(feature_path))
        throw InputError("feature file " + feature_path.string() + " does not exist");
    FeatureTable table = read_feature_file(feature_path, format);
    if (!table.rows.empty() || format == FeatureFormat::Osfv) {
        if (static_cast<long long>(table.dim) != dim)
            throw InputError("dimension mismatch: manifest says " + std::to_string(dim) + ", feature file has "
                             + std::to_string(table.dim));
    }

    std::set<std::string> names = declared_classes;
    for (const auto& r : records) {
        if (r.class_name == kUnknownName)
            continue;
        if (has_class_list && !declared_classes.contains(r.class_name))
            throw InputError("class '" + r.class_name + "' is not in the manifest's class list");
        names.insert(r.class_name);
    }
    ClassRegistry registry = make_registry(names);

    std::vector<Sample> samples;
    samples.reserve(records.size());
    for (auto& r : records) {
        if (r.row < 0 || r.row >= static_cast<long long>(table.rows.size()))
            throw InputError("row_index " + std::to_string(r.row) + " out of range in " + path.string());
        Sample s;
        const auto& row = table.rows[static_cast<std::size_t>(r.row)];
        s.features.assign(row.begin(), row.end());
        s.label = r.class_name == kUnknownName ? Label::unknown() : Label::known(find_class(registry, r.class_name));
        s.image_id = std::move(r.image_id);
        s.patch_index = r.patch_index;
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples), std::move(registry), static_cast<int>(dim));
}

void save_manifest(const Dataset& dataset, const fs::path& manifest_path, const fs::path& feature_file,
                   FeatureFormat format)
{
    FeatureTable table;
    table.dim = static_cast<std::uint32_t>(dataset.feature_dim());
    table.rows.reserve(dataset.size());
    for (const auto& s : dataset.samples())
        table.rows.emplace_back(s.features.begin(), s.features.end());

    const fs::path feature_path =
        feature_file.is_absolute() ? feature_file : manifest_path.parent_path() / feature_file;
    write_feature_file(feature_path, table, format);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out)
        throw Error("cannot write " + manifest_path.string());
    out << "feature_file=" << fs::relative(feature_path, manifest_path.parent_path().empty()
                                                             ? fs::current_path()
                                                             : manifest_path.parent_path())
                                  .generic_string()
        << '\n';
    out << "format=" << (format == FeatureFormat::Osfv ? "osfv" : "csv") << '\n';
    out << "dim=" << dataset.feature_dim() << '\n';
    out << "classes=";
    bool first = true;
    for (const auto& [id, name] : dataset.registry()) {
        out << (first ? "" : ",") << name;
        first = false;
    }
    out << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset[i];
        out << s.image_id << ',' << s.patch_index << ',' << dataset.label_name(s.label) << ',' << i << '\n';
    }
    if (!out)
        throw Error("failed writing " + manifest_path.string());
}

} // namespace osbench
