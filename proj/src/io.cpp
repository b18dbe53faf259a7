#include "cpm/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "cpm/error.hpp"

namespace cpm {

static_assert(std::endian::native == std::endian::little, "binary64 arrays are written little-endian");

// ---------------------------------------------------------------------------
// Scalars and encodings

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("cannot parse number '" + std::string(text) + "'");
    return v;
}

namespace {

constexpr std::string_view kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

long parse_long(std::string_view text) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("cannot parse integer '" + std::string(text) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("cannot parse integer '" + std::string(text) + "'");
    return v;
}

// Required-key accessor that reports the missing key by name.
const json& at(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string("missing key '") + key + "'");
    return *it;
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return at(j, key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
    }
}

Eigen::MatrixXd decode_matrix(const json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
    const auto flat = decode_f64(get<std::string>(j, key));
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw DimensionMismatch(std::string("array '") + key + "' has " + std::to_string(flat.size()) +
                                " values, expected " + std::to_string(rows * cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    return m;
}

std::string encode_matrix(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return encode_f64(flat);
}

Eigen::VectorXd decode_vector(const json& j, const char* key, Eigen::Index size) {
    const auto flat = decode_f64(get<std::string>(j, key));
    if (static_cast<Eigen::Index>(flat.size()) != size)
        throw DimensionMismatch(std::string("array '") + key + "' has " + std::to_string(flat.size()) +
                                " values, expected " + std::to_string(size));
    return Eigen::Map<const Eigen::VectorXd>(flat.data(), size);
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += kB64[v & 63];
    }
    if (i < bytes.size()) {
        std::uint32_t v = std::uint32_t{bytes[i]} << 16;
        if (i + 1 < bytes.size()) v |= std::uint32_t{bytes[i + 1]} << 8;
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? kB64[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ValidationError("base64 length is not a multiple of 4");
    auto value = [](char ch) -> int {
        const auto pos = kB64.find(ch);
        if (pos == std::string_view::npos) throw ValidationError("invalid base64 character");
        return static_cast<int>(pos);
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        const bool pad2 = text[i + 2] == '=';
        const bool pad3 = text[i + 3] == '=';
        if ((pad2 && !pad3) || ((pad2 || pad3) && i + 4 != text.size()))
            throw ValidationError("misplaced base64 padding");
        const std::uint32_t v = (static_cast<std::uint32_t>(value(text[i])) << 18) |
                                (static_cast<std::uint32_t>(value(text[i + 1])) << 12) |
                                (pad2 ? 0u : static_cast<std::uint32_t>(value(text[i + 2])) << 6) |
                                (pad3 ? 0u : static_cast<std::uint32_t>(value(text[i + 3])));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (!pad2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        if (!pad3) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
    return out;
}

std::string encode_f64(std::span<const double> values) {
    std::vector<std::uint8_t> bytes(values.size() * sizeof(double));
    if (!values.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
    return base64_encode(bytes);
}

std::vector<double> decode_f64(std::string_view text) {
    const auto bytes = base64_decode(text);
    if (bytes.size() % sizeof(double) != 0) throw ValidationError("binary64 array has a partial element");
    std::vector<double> out(bytes.size() / sizeof(double));
    if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
    return s;
}

// ---------------------------------------------------------------------------
// Provenance and files

json Provenance::to_json() const {
    return {{"tool", tool}, {"version", version}, {"config_hash", config_hash}, {"master_seed", master_seed}};
}

Provenance Provenance::from_json(const json& j) {
    Provenance p;
    p.tool = get<std::string>(j, "tool");
    p.version = get<std::string>(j, "version");
    p.config_hash = get<std::string>(j, "config_hash");
    p.master_seed = get<std::uint64_t>(j, "master_seed");
    return p;
}

std::string Provenance::csv_comment(const std::vector<std::pair<std::string, std::string>>& extra) const {
    std::string s = "# tool=" + tool + " version=" + version + " config_hash=" + config_hash +
                    " master_seed=" + std::to_string(master_seed);
    for (const auto& [k, v] : extra) s += " " + k + "=" + v;
    return s + "\n";
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// JSON mappings

json to_json(const ProsumerModel& p) {
    return {{"id", p.id}, {"a", p.a}, {"c", p.c}, {"p_min", p.p_min}, {"p_max", p.p_max}};
}

ProsumerModel prosumer_from_json(const json& j) {
    ProsumerModel p;
    p.id = get<int>(j, "id");
    p.a = get<double>(j, "a");
    p.c = get<double>(j, "c");
    p.p_min = get<double>(j, "p_min");
    p.p_max = get<double>(j, "p_max");
    return p;
}

json to_json(const MarketConfig& m) {
    json ps = json::array();
    for (const auto& p : m.prosumers) ps.push_back(to_json(p));
    return {{"prosumers", ps}, {"rho", m.rho}, {"tol", m.tol}, {"horizon", m.horizon}, {"lambda0", m.lambda0}};
}

MarketConfig market_from_json(const json& j) {
    MarketConfig m;
    for (const auto& p : at(j, "prosumers")) m.prosumers.push_back(prosumer_from_json(p));
    m.rho = get<double>(j, "rho");
    m.tol = get<double>(j, "tol");
    m.horizon = get<int>(j, "horizon");
    m.lambda0 = get<double>(j, "lambda0");
    return m;
}

json to_json(const AttackSpec& a) {
    return {{"target", a.target},         {"start_iter", a.start_iter}, {"kind", std::string(to_string(a.kind))},
            {"magnitude", a.magnitude},   {"noise_seed", a.noise_seed}};
}

AttackSpec attack_from_json(const json& j) {
    AttackSpec a;
    a.target = get<int>(j, "target");
    a.start_iter = get<int>(j, "start_iter");
    a.kind = attack_kind_from_string(get<std::string>(j, "kind"));
    a.magnitude = get<double>(j, "magnitude");
    a.noise_seed = get<std::uint64_t>(j, "noise_seed");
    return a;
}

json to_json(const MarketRandomization& r) {
    return {{"n_prosumers", r.n_prosumers},
            {"a_min", r.a_min},
            {"a_max", r.a_max},
            {"c_min", r.c_min},
            {"c_max", r.c_max},
            {"p_min", r.p_min},
            {"p_max", r.p_max},
            {"contraction_min", r.contraction_min},
            {"contraction_max", r.contraction_max}};
}

MarketRandomization randomization_from_json(const json& j) {
    MarketRandomization r;
    r.n_prosumers = get<int>(j, "n_prosumers");
    r.a_min = get<double>(j, "a_min");
    r.a_max = get<double>(j, "a_max");
    r.c_min = get<double>(j, "c_min");
    r.c_max = get<double>(j, "c_max");
    r.p_min = get<double>(j, "p_min");
    r.p_max = get<double>(j, "p_max");
    r.contraction_min = get<double>(j, "contraction_min");
    r.contraction_max = get<double>(j, "contraction_max");
    return r;
}

json to_json(const DatasetConfig& d) {
    return {{"n_traces", d.n_traces},
            {"attacked_fraction", d.attacked_fraction},
            {"protocol", std::string(to_string(d.protocol))},
            {"market", to_json(d.market)},
            {"randomization", to_json(d.randomization)},
            {"master_seed", d.master_seed}};
}

DatasetConfig dataset_config_from_json(const json& j) {
    DatasetConfig d;
    d.n_traces = get<int>(j, "n_traces");
    d.attacked_fraction = get<double>(j, "attacked_fraction");
    d.protocol = protocol_from_string(get<std::string>(j, "protocol"));
    d.market = market_from_json(at(j, "market"));
    d.randomization = randomization_from_json(at(j, "randomization"));
    d.master_seed = get<std::uint64_t>(j, "master_seed");
    return d;
}

json to_json(const SamplerConfig& s) {
    return {{"n_burn", s.n_burn}, {"n_keep", s.n_keep}, {"thin", s.thin}, {"seed", s.seed},
            {"bias_variance", s.bias_variance}};
}

SamplerConfig sampler_from_json(const json& j) {
    SamplerConfig s;
    s.n_burn = get<int>(j, "n_burn");
    s.n_keep = get<int>(j, "n_keep");
    s.thin = get<int>(j, "thin");
    s.seed = get<std::uint64_t>(j, "seed");
    s.bias_variance = get<double>(j, "bias_variance");
    return s;
}

json to_json(const CpmConfig& c) {
    return {{"delta_w", c.delta_w},
            {"n_models", c.n_models},
            {"sampler", to_json(c.sampler)},
            {"threshold", c.threshold},
            {"features", std::string(to_string(c.feature_mode))},
            {"epsilon", c.epsilon}};
}

CpmConfig cpm_config_from_json(const json& j) {
    CpmConfig c;
    c.delta_w = get<int>(j, "delta_w");
    c.n_models = get<int>(j, "n_models");
    c.sampler = sampler_from_json(at(j, "sampler"));
    c.threshold = get<double>(j, "threshold");
    c.feature_mode = feature_mode_from_string(get<std::string>(j, "features"));
    c.epsilon = get<double>(j, "epsilon");
    return c;
}

json to_json(const FeatureTransform& ft) {
    return {{"epsilon", ft.epsilon},
            {"mode", std::string(to_string(ft.mode))},
            {"window_len", ft.window_len},
            {"means", encode_f64(ft.means)},
            {"stds", encode_f64(ft.stds)}};
}

FeatureTransform feature_transform_from_json(const json& j) {
    FeatureTransform ft;
    ft.epsilon = get<double>(j, "epsilon");
    ft.mode = feature_mode_from_string(get<std::string>(j, "mode"));
    ft.window_len = get<int>(j, "window_len");
    ft.means = decode_f64(get<std::string>(j, "means"));
    ft.stds = decode_f64(get<std::string>(j, "stds"));
    ft.validate();
    return ft;
}

json to_json(const BlrPosterior& post) {
    return {{"window_len", post.window_len},
            {"n_samples", post.n_samples()},
            {"encoding", "base64 little-endian binary64, row-major"},
            {"transform", to_json(post.transform)},
            {"alpha", encode_matrix(post.alpha)},
            {"bias", encode_f64(std::span<const double>(post.bias.data(), static_cast<std::size_t>(post.bias.size())))},
            {"tau", encode_f64(std::span<const double>(post.tau.data(), static_cast<std::size_t>(post.tau.size())))},
            {"lambda_local", encode_matrix(post.lambda_local)}};
}

BlrPosterior posterior_from_json(const json& j) {
    BlrPosterior post;
    post.window_len = get<int>(j, "window_len");
    const auto s = static_cast<Eigen::Index>(get<int>(j, "n_samples"));
    post.transform = feature_transform_from_json(at(j, "transform"));
    post.alpha = decode_matrix(j, "alpha", s, post.window_len);
    post.bias = decode_vector(j, "bias", s);
    post.tau = decode_vector(j, "tau", s);
    post.lambda_local = decode_matrix(j, "lambda_local", s, post.window_len);
    post.validate();
    return post;
}

// ---------------------------------------------------------------------------
// Datasets

std::string dataset_id(const DatasetConfig& cfg) {
    return std::string(to_string(cfg.protocol)) + "-n" + std::to_string(cfg.n_traces) + "-seed" +
           std::to_string(cfg.master_seed) + "-" + hex64(fnv1a64(to_json(cfg).dump())).substr(0, 8);
}

std::string traces_csv(const Dataset& ds, const Provenance& prov) {
    std::string out = prov.csv_comment({{"dataset_id", dataset_id(ds.config)}});
    out += "trace_id,iteration,gap\n";
    for (const auto& t : ds.traces)
        for (std::size_t k = 0; k < t.gaps.size(); ++k) {
            out += t.trace_id;
            out += ',';
            out += std::to_string(k);
            out += ',';
            out += format_double(t.gaps[k]);
            out += '\n';
        }
    return out;
}

json dataset_manifest(const Dataset& ds, const Provenance& prov) {
    json traces = json::array();
    for (const auto& t : ds.traces) {
        traces.push_back({{"trace_id", t.trace_id},
                          {"label", t.label},
                          {"converged", t.converged},
                          {"first_converged_iter", t.first_converged_iter ? json(*t.first_converged_iter) : json()},
                          {"seed", t.seed},
                          {"attack", t.attack ? to_json(*t.attack) : json()},
                          {"market", to_json(t.market)}});
    }
    return {{"provenance", prov.to_json()},
            {"dataset_id", dataset_id(ds.config)},
            {"config", to_json(ds.config)},
            {"trace_file", std::string(kTraceCsv)},
            {"traces", traces}};
}

void write_dataset(const Dataset& ds, const fs::path& dir, const Provenance& prov) {
    write_file_atomic(dir / kTraceCsv, traces_csv(ds, prov));
    write_file_atomic(dir / kDatasetManifest, dataset_manifest(ds, prov).dump(1) + "\n");
}

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t f = 0;
        for (;;) {
            const std::size_t comma = line.find(',', f);
            fields.emplace_back(line.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
            if (comma == std::string_view::npos) break;
            f = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::vector<std::pair<std::string, std::string>> parse_csv_comment(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    if (text.empty() || text.front() != '#') return out;
    const std::string_view line = text.substr(1, text.find('\n') == std::string_view::npos ? std::string_view::npos
                                                                                             : text.find('\n') - 1);
    std::istringstream ss{std::string(line)};
    std::string token;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) out.emplace_back(token.substr(0, eq), token.substr(eq + 1));
    }
    return out;
}

Dataset read_dataset(const fs::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_file(dir / kDatasetManifest));
    } catch (const json::exception& e) {
        throw ValidationError("cannot parse " + (dir / kDatasetManifest).string() + ": " + e.what());
    }
    Dataset ds;
    ds.config = dataset_config_from_json(at(manifest, "config"));

    std::map<std::string, std::size_t> index;
    for (const auto& tj : at(manifest, "traces")) {
        NegotiationTrace t;
        t.trace_id = get<std::string>(tj, "trace_id");
        t.label = get<int>(tj, "label");
        t.converged = get<bool>(tj, "converged");
        if (!at(tj, "first_converged_iter").is_null()) t.first_converged_iter = get<int>(tj, "first_converged_iter");
        t.seed = get<std::uint64_t>(tj, "seed");
        if (!at(tj, "attack").is_null()) t.attack = attack_from_json(at(tj, "attack"));
        t.market = market_from_json(at(tj, "market"));
        if ((t.label == 0) != t.attack.has_value())
            throw ValidationError("trace " + t.trace_id + ": label disagrees with attack presence");
        index.emplace(t.trace_id, ds.traces.size());
        ds.traces.push_back(std::move(t));
    }

    const auto rows = parse_csv_rows(read_file(dir / kTraceCsv));
    if (rows.empty() || rows.front() != std::vector<std::string>{"trace_id", "iteration", "gap"})
        throw ValidationError((dir / kTraceCsv).string() + ": expected header trace_id,iteration,gap");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3) throw ValidationError("trace csv row " + std::to_string(r) + " has " +
                                                    std::to_string(row.size()) + " fields");
        const auto it = index.find(row[0]);
        if (it == index.end()) throw ValidationError("trace csv references unknown trace " + row[0]);
        auto& t = ds.traces[it->second];
        if (parse_long(row[1]) != static_cast<long>(t.gaps.size()))
            throw ValidationError("trace " + row[0] + ": iterations out of order at row " + std::to_string(r));
        t.gaps.push_back(parse_double(row[2]));
    }
    for (const auto& t : ds.traces)
        if (static_cast<int>(t.gaps.size()) != t.market.horizon)
            throw ValidationError("trace " + t.trace_id + " has " + std::to_string(t.gaps.size()) +
                                  " gaps, horizon is " + std::to_string(t.market.horizon));
    return ds;
}

// ---------------------------------------------------------------------------
// Ensembles

std::string model_file_name(int m) {
    std::string digits = std::to_string(m);
    if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
    return "model_" + digits + ".json";
}

namespace {

std::string model_file_content(const CpmEnsemble& ens, int m, const Provenance& prov) {
    json j = to_json(ens.models[static_cast<std::size_t>(m - 1)]);
    j["provenance"] = prov.to_json();
    j["m"] = m;
    j["delta_w"] = ens.config.delta_w;
    j["seed"] = model_seed(ens.config.sampler, m);
    return j.dump(1) + "\n";
}

}  // namespace

std::string ensemble_fingerprint(const CpmEnsemble& ens, const Provenance& prov) {
    std::uint64_t h = fnv1a64(to_json(ens.config).dump());
    for (int m = 1; m <= static_cast<int>(ens.models.size()); ++m)
        h = fnv1a64(hex64(h) + model_file_content(ens, m, prov));
    return hex64(h);
}

void write_ensemble(const CpmEnsemble& ens, const fs::path& dir, const Provenance& prov, const json& metadata) {
    ens.validate();
    json models = json::array();
    std::uint64_t h = fnv1a64(to_json(ens.config).dump());
    for (int m = 1; m <= static_cast<int>(ens.models.size()); ++m) {
        const std::string content = model_file_content(ens, m, prov);
        h = fnv1a64(hex64(h) + content);
        write_file_atomic(dir / model_file_name(m), content);
        models.push_back({{"m", m},
                          {"window_len", ens.models[static_cast<std::size_t>(m - 1)].window_len},
                          {"file", model_file_name(m)},
                          {"seed", model_seed(ens.config.sampler, m)},
                          {"content_hash", hex64(fnv1a64(content))}});
    }
    const json manifest = {{"provenance", prov.to_json()},
                           {"config", to_json(ens.config)},
                           {"delta_w", ens.config.delta_w},
                           {"n_models", ens.config.n_models},
                           {"span", ens.config.span()},
                           {"fingerprint", hex64(h)},
                           {"models", models},
                           {"metadata", metadata}};
    write_file_atomic(dir / kEnsembleManifest, manifest.dump(1) + "\n");
}

EnsembleFiles read_ensemble(const fs::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_file(dir / kEnsembleManifest));
    } catch (const json::exception& e) {
        throw ValidationError("cannot parse " + (dir / kEnsembleManifest).string() + ": " + e.what());
    }
    EnsembleFiles out;
    out.provenance = Provenance::from_json(at(manifest, "provenance"));
    out.ensemble.config = cpm_config_from_json(at(manifest, "config"));
    out.fingerprint = get<std::string>(manifest, "fingerprint");
    if (manifest.contains("metadata")) out.metadata = manifest["metadata"];
    for (const auto& mj : at(manifest, "models")) {
        const std::string content = read_file(dir / get<std::string>(mj, "file"));
        if (hex64(fnv1a64(content)) != get<std::string>(mj, "content_hash"))
            throw ValidationError("model file " + get<std::string>(mj, "file") + " does not match its hash");
        try {
            out.ensemble.models.push_back(posterior_from_json(json::parse(content)));
        } catch (const json::exception& e) {
            throw ValidationError("cannot parse model file " + get<std::string>(mj, "file") + ": " + e.what());
        }
    }
    out.ensemble.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string metrics_grid_csv(const MetricsReport& report, const Provenance& prov) {
    std::vector<int> dws, spans;
    for (const auto& c : report.cells) {
        if (std::find(dws.begin(), dws.end(), c.delta_w) == dws.end()) dws.push_back(c.delta_w);
        if (std::find(spans.begin(), spans.end(), c.span) == spans.end()) spans.push_back(c.span);
    }
    std::sort(dws.begin(), dws.end());
    std::sort(spans.begin(), spans.end());
    std::string out = prov.csv_comment({{"dataset_id", report.dataset_id},
                                        {"fingerprint", report.fingerprint},
                                        {"metric", "mcc"}});
    out += "delta_w";
    for (int s : spans) out += "," + std::to_string(s);
    out += "\n";
    for (int dw : dws) {
        out += std::to_string(dw);
        for (int s : spans) {
            out += ",";
            if (const auto* c = report.find(dw, s)) out += format_double(c->mcc);
        }
        out += "\n";
    }
    return out;
}

std::string metrics_long_csv(const MetricsReport& report, const Provenance& prov) {
    std::string out =
        prov.csv_comment({{"dataset_id", report.dataset_id}, {"fingerprint", report.fingerprint}});
    out += "delta_w,span,tp,fp,tn,fn,fpr,fnr,mcc\n";
    for (const auto& c : report.cells) {
        out += std::to_string(c.delta_w) + "," + std::to_string(c.span) + "," + std::to_string(c.counts.tp) + "," +
               std::to_string(c.counts.fp) + "," + std::to_string(c.counts.tn) + "," + std::to_string(c.counts.fn) +
               "," + format_double(c.fpr) + "," + format_double(c.fnr) + "," + format_double(c.mcc) + "\n";
    }
    return out;
}

MetricsReport parse_metrics_long_csv(std::string_view text) {
    MetricsReport report;
    for (const auto& [k, v] : parse_csv_comment(text)) {
        if (k == "dataset_id") report.dataset_id = v;
        if (k == "fingerprint") report.fingerprint = v;
    }
    const auto rows = parse_csv_rows(text);
    const std::vector<std::string> header{"delta_w", "span", "tp", "fp", "tn", "fn", "fpr", "fnr", "mcc"};
    if (rows.empty() || rows.front() != header) throw ValidationError("metrics csv: unexpected header");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) throw ValidationError("metrics csv row " + std::to_string(r) + " malformed");
        MetricsCell c;
        c.delta_w = static_cast<int>(parse_long(row[0]));
        c.span = static_cast<int>(parse_long(row[1]));
        c.counts = {parse_u64(row[2]), parse_u64(row[3]), parse_u64(row[4]), parse_u64(row[5])};
        c.fpr = parse_double(row[6]);
        c.fnr = parse_double(row[7]);
        c.mcc = parse_double(row[8]);
        report.cells.push_back(c);
    }
    return report;
}

std::string false_positive_csv(std::span<const FalsePositiveRecord> records, const Provenance& prov,
                               std::span<const int> delta_ws) {
    std::string out = prov.csv_comment();
    out += "delta_w,trace_id,min_abs_gap,gap_variability,p_final,target,start_iter,kind,magnitude,noise_seed\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out += (i < delta_ws.size() ? std::to_string(delta_ws[i]) : std::string()) + "," + r.trace_id + "," +
               format_double(r.min_abs_gap) + "," + format_double(r.gap_variability) + "," +
               format_double(r.p_final) + "," + std::to_string(r.attack.target) + "," +
               std::to_string(r.attack.start_iter) + "," + std::string(to_string(r.attack.kind)) + "," +
               format_double(r.attack.magnitude) + "," + std::to_string(r.attack.noise_seed) + "\n";
    }
    return out;
}

std::vector<FalsePositiveRecord> parse_false_positive_csv(std::string_view text) {
    const auto rows = parse_csv_rows(text);
    if (rows.empty() || rows.front().size() != 10 || rows.front()[1] != "trace_id")
        throw ValidationError("false-positive csv: unexpected header");
    std::vector<FalsePositiveRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 10) throw ValidationError("false-positive csv row " + std::to_string(r) + " malformed");
        FalsePositiveRecord rec;
        rec.trace_id = row[1];
        rec.min_abs_gap = parse_double(row[2]);
        rec.gap_variability = parse_double(row[3]);
        rec.p_final = parse_double(row[4]);
        rec.attack.target = static_cast<int>(parse_long(row[5]));
        rec.attack.start_iter = static_cast<int>(parse_long(row[6]));
        rec.attack.kind = attack_kind_from_string(row[7]);
        rec.attack.magnitude = parse_double(row[8]);
        rec.attack.noise_seed = parse_u64(row[9]);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace cpm
