#include "osbench/model_io.hpp"

#include "osbench/array_store.hpp"
#include "osbench/error.hpp"
#include "osbench/text.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace osbench {

// ---- ArrayStore --------------------------------------------------------------

void ArrayStore::put(std::string name, std::vector<double> values)
{
    if (contains(name))
        throw Error("duplicate model array '" + name + "'");
    entries_.emplace_back(std::move(name), std::move(values));
}

void ArrayStore::put_matrix(const std::string& name, const Matrix& m)
{
    put_scalar(name + ".rows", static_cast<double>(m.rows()));
    put_scalar(name + ".cols", static_cast<double>(m.cols()));
    put(name, std::vector<double>(m.data().begin(), m.data().end()));
}

bool ArrayStore::contains(std::string_view name) const
{
    for (const auto& [key, values] : entries_)
        if (key == name)
            return true;
    return false;
}

const std::vector<double>& ArrayStore::get(std::string_view name) const
{
    for (const auto& [key, values] : entries_)
        if (key == name)
            return values;
    throw InputError("model is missing array '" + std::string(name) + "'");
}

double ArrayStore::scalar(std::string_view name) const
{
    const auto& values = get(name);
    if (values.size() != 1)
        throw InputError("model array '" + std::string(name) + "' is not a scalar");
    return values[0];
}

Matrix ArrayStore::get_matrix(const std::string& name) const
{
    const auto rows = static_cast<std::size_t>(scalar(name + ".rows"));
    const auto cols = static_cast<std::size_t>(scalar(name + ".cols"));
    const auto& values = get(name);
    if (values.size() != rows * cols)
        throw InputError("model matrix '" + name + "' has the wrong size");
    return Matrix::from_data(rows, cols, values);
}

// ---- Model documents ---------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "osbench_model_v1";

void append_le(std::string& out, double value)
{
    auto bits = std::bit_cast<std::uint64_t>(value);
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>(bits & 0xFF));
        bits >>= 8;
    }
}

double read_le(const char* p)
{
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b)
        bits = (bits << 8) | static_cast<unsigned char>(p[b]);
    return std::bit_cast<double>(bits);
}

std::string join_ints(const std::vector<int>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

} // namespace

std::string serialize_model(const TrainedModel& model)
{
    const ModelInfo& info = model.info();
    ArrayStore store;
    store.put("standardizer.mean", info.standardizer.mean);
    store.put("standardizer.scale", info.standardizer.scale);
    model.save_params(store);

    std::ostringstream head;
    head << kMagic << '\n';
    head << "variant=" << variant_name(info.variant) << '\n';
    head << "detector_base=" << variant_name(info.detector_base) << '\n';
    head << "feature_dim=" << info.feature_dim << '\n';
    head << "seed=" << info.seed << '\n';
    head << "kernel=" << kernel_name(info.kernel.kind) << '\n';
    head << "gamma=" << format_double(info.kernel.gamma) << '\n';
    for (const auto& [key, value] : info.hyperparams)
        head << "hyper." << key << '=' << format_double(value) << '\n';
    for (const auto& [id, name] : info.registry)
        head << "class." << id << '=' << name << '\n';
    head << "class_ids=" << join_ints(info.class_ids) << '\n';

    std::string payload;
    for (const auto& [name, values] : store.entries()) {
        head << "array." << name << '=' << values.size() << '\n';
        for (double v : values)
            append_le(payload, v);
    }
    head << "binary_bytes=" << payload.size() << '\n';
    return head.str() + payload;
}

std::unique_ptr<TrainedModel> deserialize_model(const std::string& bytes)
{
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string_view {
        const auto end = bytes.find('\n', pos);
        if (end == std::string::npos)
            throw InputError("model file is truncated");
        std::string_view line(bytes.data() + pos, end - pos);
        pos = end + 1;
        return line;
    };

    if (next_line() != kMagic)
        throw InputError("not an osbench model file");

    ModelInfo info;
    std::vector<std::pair<std::string, std::size_t>> arrays;
    std::size_t binary_bytes = 0;
    bool have_payload = false;
    bool have_classes = false;
    while (!have_payload) {
        const auto line = next_line();
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw InputError("malformed model header line '" + std::string(line) + "'");
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        if (key == "variant")
            info.variant = parse_variant(value);
        else if (key == "detector_base")
            info.detector_base = parse_variant(value);
        else if (key == "feature_dim")
            info.feature_dim = static_cast<int>(parse_integer(value, "feature_dim"));
        else if (key == "seed")
            info.seed = parse_unsigned(value, "seed");
        else if (key == "kernel")
            info.kernel.kind = parse_kernel(value);
        else if (key == "gamma")
            info.kernel.gamma = parse_double(value, "gamma");
        else if (key.starts_with("hyper."))
            info.hyperparams[std::string(key.substr(6))] = parse_double(value, key);
        else if (key.starts_with("class."))
            info.registry[static_cast<int>(parse_integer(key.substr(6), "class id"))] = std::string(value);
        else if (key == "class_ids") {
            have_classes = true;
            if (!value.empty())
                for (auto part : split_view(value, ','))
                    info.class_ids.push_back(static_cast<int>(parse_integer(part, "class id")));
        } else if (key.starts_with("array."))
            arrays.emplace_back(std::string(key.substr(6)), static_cast<std::size_t>(parse_unsigned(value, key)));
        else if (key == "binary_bytes") {
            binary_bytes = static_cast<std::size_t>(parse_unsigned(value, key));
            have_payload = true;
        } else
            throw InputError("unknown model header key '" + std::string(key) + "'");
    }
    if (!have_classes)
        throw InputError("model header lacks class_ids");
    if (bytes.size() - pos != binary_bytes)
        throw InputError("model payload size does not match binary_bytes");

    ArrayStore store;
    std::size_t offset = pos;
    for (const auto& [name, length] : arrays) {
        if (offset + 8 * length > bytes.size())
            throw InputError("model payload shorter than declared arrays");
        std::vector<double> values(length);
        for (std::size_t i = 0; i < length; ++i)
            values[i] = read_le(bytes.data() + offset + 8 * i);
        offset += 8 * length;
        store.put(name, std::move(values));
    }
    if (offset != bytes.size())
        throw InputError("model payload longer than declared arrays");

    info.standardizer.mean = store.get("standardizer.mean");
    info.standardizer.scale = store.get("standardizer.scale");
    return restore_model(std::move(info), store);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write model file " + path.string());
    const auto bytes = serialize_model(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("failed writing model file " + path.string());
}

std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open model file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

} // namespace osbench
