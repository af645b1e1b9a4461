#include "cyberinv/field_io.hpp"

#include "cyberinv/csv.hpp"
#include "cyberinv/errors.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <ostream>
#include <vector>

namespace cyberinv {

using nlohmann::json;

namespace {

std::array<unsigned char, 8> le_bytes(double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    std::array<unsigned char, 8> out{};
    for (int i = 0; i < 8; ++i) {
        out[static_cast<std::size_t>(i)] = static_cast<unsigned char>(bits >> (8 * i));
    }
    return out;
}

double from_le_bytes(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

std::vector<unsigned char> encode(std::span<const double> values) {
    std::vector<unsigned char> out;
    out.reserve(values.size() * 8);
    for (double x : values) {
        const auto b = le_bytes(x);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void write_metadata(const FieldFiles& files, const FieldMeta& meta, const std::string& checksum) {
    json doc = to_json(meta);
    doc["checksum"] = {{"algorithm", "fnv1a64"}, {"value", checksum}};
    doc["data"] = {{"value", files.value.filename().string()},
                   {"policy", files.policy.filename().string()},
                   {"dtype", "float64-le"},
                   {"layout", "snapshot,lambda,h"}};
    std::ofstream out(files.metadata, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + files.metadata.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed for " + files.metadata.string());
    }
}

template <class T>
T get(const json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw IoError(std::string("field metadata: missing key '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw IoError(std::string("field metadata: bad value for '") + key + "': " + e.what());
    }
}

} // namespace

FieldFiles FieldFiles::in(const std::filesystem::path& dir, const std::string& stem) {
    return {dir / (stem + ".json"), dir / (stem + ".value.bin"), dir / (stem + ".policy.bin")};
}

void Fnv1a::update(const unsigned char* data, std::size_t size) {
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= data[i];
        state_ *= 1099511628211ULL;
    }
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

json to_json(const FieldMeta& meta) {
    const auto& p = meta.problem;
    const auto& g = meta.grid;
    const auto& o = meta.options;
    return {
        {"format", "cyberinv-field/1"},
        {"one_dimensional", meta.one_dimensional},
        {"poisson_intensity", meta.poisson_intensity},
        {"lambda_extrapolation", meta.lambda_extrapolation},
        {"snapshots", meta.snapshots()},
        {"hawkes",
         {{"alpha", p.hawkes.alpha()},
          {"lambda0", p.hawkes.lambda0()},
          {"xi", p.hawkes.xi()},
          {"beta", p.hawkes.beta()}}},
        {"breach",
         {{"family", std::string(to_string(p.breach.family))},
          {"v", p.breach.v},
          {"a", p.breach.a},
          {"b", p.breach.b}}},
        {"costs",
         {{"delta", p.costs.delta},
          {"gamma", p.costs.gamma},
          {"eta_mean", p.costs.eta_mean},
          {"eta_var", p.costs.eta_var},
          {"rho", p.costs.rho},
          {"horizon", p.costs.horizon},
          {"utility", p.costs.utility.to_string()},
          {"loss_family", std::string(to_string(p.costs.loss_family))}}},
        {"grid",
         {{"lambda_min", g.lambda_min},
          {"lambda_max", g.lambda_max},
          {"d_lambda", g.d_lambda},
          {"h_min", g.h_min},
          {"h_max", g.h_max},
          {"d_h", g.d_h},
          {"snapshot_intervals", g.snapshot_intervals}}},
        {"solver",
         {{"rtol", o.rtol},
          {"atol", o.atol},
          {"upwind", o.upwind},
          {"jump_shift", std::string(to_string(o.jump_shift))},
          {"query", std::string(to_string(o.query))},
          {"stream_threshold", o.stream_threshold}}},
    };
}

FieldMeta field_meta_from_json(const json& doc) {
    try {
        FieldMeta meta;
        const auto& h = doc.at("hawkes");
        meta.problem.hawkes = HawkesParams(get<double>(h, "alpha"), get<double>(h, "lambda0"),
                                           get<double>(h, "xi"), get<double>(h, "beta"));
        const auto& b = doc.at("breach");
        meta.problem.breach.family = parse_breach_family(get<std::string>(b, "family"));
        meta.problem.breach.v = get<double>(b, "v");
        meta.problem.breach.a = get<double>(b, "a");
        meta.problem.breach.b = get<double>(b, "b");
        const auto& c = doc.at("costs");
        auto& costs = meta.problem.costs;
        costs.delta = get<double>(c, "delta");
        costs.gamma = get<double>(c, "gamma");
        costs.eta_mean = get<double>(c, "eta_mean");
        costs.eta_var = get<double>(c, "eta_var");
        costs.rho = get<double>(c, "rho");
        costs.horizon = get<double>(c, "horizon");
        costs.utility = TerminalUtility::parse(get<std::string>(c, "utility"));
        costs.loss_family = parse_loss_family(get<std::string>(c, "loss_family"));
        const auto& g = doc.at("grid");
        meta.grid.lambda_min = get<double>(g, "lambda_min");
        meta.grid.lambda_max = get<double>(g, "lambda_max");
        meta.grid.d_lambda = get<double>(g, "d_lambda");
        meta.grid.h_min = get<double>(g, "h_min");
        meta.grid.h_max = get<double>(g, "h_max");
        meta.grid.d_h = get<double>(g, "d_h");
        meta.grid.snapshot_intervals = get<std::size_t>(g, "snapshot_intervals");
        const auto& o = doc.at("solver");
        meta.options.rtol = get<double>(o, "rtol");
        meta.options.atol = get<double>(o, "atol");
        meta.options.upwind = get<bool>(o, "upwind");
        meta.options.jump_shift = parse_jump_shift(get<std::string>(o, "jump_shift"));
        meta.options.query = parse_query_mode(get<std::string>(o, "query"));
        meta.options.stream_threshold = get<std::size_t>(o, "stream_threshold");
        meta.one_dimensional = get<bool>(doc, "one_dimensional");
        meta.poisson_intensity = get<double>(doc, "poisson_intensity");
        meta.lambda_extrapolation = get<std::string>(doc, "lambda_extrapolation");
        meta.grid.validate();
        meta.problem.validate();
        return meta;
    } catch (const json::exception& e) {
        throw IoError(std::string("field metadata: ") + e.what());
    } catch (const ArgumentError& e) {
        throw IoError(std::string("field metadata: ") + e.what());
    }
}

json to_json(const QualityReport& q) {
    json residuals = json::array();
    for (const auto& r : q.residuals) {
        residuals.push_back({{"t", r.t}, {"interior", r.interior}, {"boundary", r.boundary}});
    }
    return {
        {"wall_seconds", q.wall_seconds},
        {"terminal_error", q.terminal_error},
        {"monotonicity",
         {{"checked", q.monotonicity_checked},
          {"violations", q.monotonicity_violations},
          {"fraction", q.violation_fraction()}}},
        {"residuals", residuals},
        {"integrator",
         {{"steps", q.integrator.steps},
          {"rejected", q.integrator.rejected},
          {"rhs_evals", q.integrator.rhs_evals},
          {"jacobian_evals", q.integrator.jacobian_evals},
          {"factorizations", q.integrator.factorizations},
          {"min_step", q.integrator.min_step_taken},
          {"max_step", q.integrator.max_step_taken}}},
        {"streamed", q.streamed},
        {"warnings", q.warnings},
    };
}

void write_field(const FieldFiles& files, const ValueField& value, const PolicyField& policy) {
    if (!(value.meta() == policy.meta())) {
        throw ArgumentError("write_field: value and policy fields describe different solves");
    }
    const auto vb = encode(value.data());
    const auto pb = encode(policy.data());
    Fnv1a hash;
    hash.update(vb.data(), vb.size());
    hash.update(pb.data(), pb.size());
    write_bytes(files.value, vb);
    write_bytes(files.policy, pb);
    write_metadata(files, value.meta(), hash.hex());
}

LoadedField read_field(const FieldFiles& files) {
    std::ifstream in(files.metadata);
    if (!in) {
        throw IoError("cannot open " + files.metadata.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + files.metadata.string() + ": " + e.what());
    }
    const FieldMeta meta = field_meta_from_json(doc);
    const auto vb = read_bytes(files.value);
    const auto pb = read_bytes(files.policy);
    const std::size_t expected = meta.snapshots() * meta.grid.nodes() * 8;
    if (vb.size() != expected || pb.size() != expected) {
        throw IoError("field data size does not match metadata for " + files.metadata.string());
    }
    Fnv1a hash;
    hash.update(vb.data(), vb.size());
    hash.update(pb.data(), pb.size());
    std::string stored;
    try {
        stored = doc.at("checksum").at("value").get<std::string>();
    } catch (const json::exception&) {
        throw IoError("field metadata: missing checksum");
    }
    if (stored != hash.hex()) {
        throw IoError("checksum mismatch for " + files.metadata.string());
    }
    auto decode = [](const std::vector<unsigned char>& bytes) {
        std::vector<double> out(bytes.size() / 8);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = from_le_bytes(bytes.data() + 8 * i);
        }
        return out;
    };
    return {ValueField(meta, decode(vb)), PolicyField(meta, decode(pb))};
}

StreamingFieldWriter::StreamingFieldWriter(FieldFiles files, const FieldMeta& meta)
    : files_(std::move(files)), meta_(meta) {
    const auto bytes = static_cast<std::uintmax_t>(meta_.snapshots() * meta_.grid.nodes() * 8);
    for (const auto* path : {&files_.value, &files_.policy}) {
        { std::ofstream touch(*path, std::ios::binary | std::ios::trunc); }
        std::error_code ec;
        std::filesystem::resize_file(*path, bytes, ec);
        if (ec) {
            throw IoError("cannot allocate " + path->string() + ": " + ec.message());
        }
    }
    value_.open(files_.value, std::ios::binary | std::ios::in | std::ios::out);
    policy_.open(files_.policy, std::ios::binary | std::ios::in | std::ios::out);
    if (!value_ || !policy_) {
        throw IoError("cannot open field data files for writing");
    }
}

void StreamingFieldWriter::write(std::size_t k, std::span<const double> value,
                                 std::span<const double> policy) {
    const std::size_t nodes = meta_.grid.nodes();
    if (k >= meta_.snapshots() || value.size() != nodes || policy.size() != nodes) {
        throw ArgumentError("StreamingFieldWriter: snapshot does not fit the field");
    }
    const auto offset = static_cast<std::streamoff>(k * nodes * 8);
    for (auto [stream, data] : {std::pair{&value_, value}, std::pair{&policy_, policy}}) {
        const auto bytes = encode(data);
        stream->seekp(offset);
        stream->write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
        if (!*stream) {
            throw IoError("write failed while streaming field snapshot");
        }
    }
}

void StreamingFieldWriter::finish() {
    value_.close();
    policy_.close();
    Fnv1a hash;
    for (const auto* path : {&files_.value, &files_.policy}) {
        const auto bytes = read_bytes(*path);
        hash.update(bytes.data(), bytes.size());
    }
    write_metadata(files_, meta_, hash.hex());
}

void write_field_csv(std::ostream& out, const ValueField& value, const PolicyField& policy) {
    const auto& meta = value.meta();
    const auto& g = meta.grid;
    const std::size_t nl = g.n_lambda();
    const std::size_t nh = g.n_h();
    out << "t,lambda,h,V,z_star\n";
    for (std::size_t k = 0; k < meta.snapshots(); ++k) {
        const double t = meta.time_at(k);
        for (std::size_t n = 0; n < nl; ++n) {
            const double lambda = meta.one_dimensional ? meta.poisson_intensity : g.lambda_at(n);
            for (std::size_t m = 0; m < nh; ++m) {
                write_csv_row(out, t, lambda, g.h_at(m), value.at(k, n, m), policy.at(k, n, m));
            }
        }
    }
    if (!out) {
        throw IoError("failed writing field CSV");
    }
}

} // namespace cyberinv
