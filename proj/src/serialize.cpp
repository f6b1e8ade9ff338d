#include "geoflow/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace geoflow {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json frame_to_json(const TangentFrame& frame) {
    nlohmann::json j;
    j["footpoint"] = frame.footpoint();
    nlohmann::json basis = nlohmann::json::array();
    for (Eigen::Index c = 0; c < frame.basis().cols(); ++c) {
        nlohmann::json col = nlohmann::json::array();
        for (Eigen::Index r = 0; r < frame.basis().rows(); ++r)
            col.push_back(frame.basis()(r, c));
        basis.push_back(std::move(col));
    }
    j["basis"] = std::move(basis);
    nlohmann::json sv = nlohmann::json::array();
    for (Eigen::Index i = 0; i < frame.singular_values().size(); ++i)
        sv.push_back(frame.singular_values()(i));
    j["singular_values"] = std::move(sv);
    j["sigma"] = frame.sigma_pert();
    j["m"] = frame.ensemble_size();
    j["k"] = frame.dim();
    j["degenerate"] = frame.degenerate();
    return j;
}

std::string trace_to_csv(const EditTrace& trace) {
    std::string out = "iter,loss,tube_dist,deviation,refresh_flag";
    const std::size_t dim = trace.records.empty() ? 0 : trace.records.front().x.size();
    for (std::size_t i = 0; i < dim; ++i) out += ",x" + std::to_string(i);
    out += "\n";
    for (const EditRecord& rec : trace.records) {
        out += std::to_string(rec.iteration);
        out += ',' + format_double(rec.loss);
        out += ',' + format_double(rec.tube_distance);
        out += ',' + format_double(rec.frame_deviation);
        out += rec.refreshed ? ",1" : ",0";
        for (double xi : rec.x) out += ',' + format_double(xi);
        out += '\n';
    }
    return out;
}

nlohmann::json trace_to_json(const EditTrace& trace) {
    nlohmann::json records = nlohmann::json::array();
    for (const EditRecord& rec : trace.records) {
        nlohmann::json j;
        j["iter"] = rec.iteration;
        j["x"] = rec.x;
        j["step"] = rec.step;
        j["loss"] = rec.loss;
        j["tube_dist"] = rec.tube_distance;
        j["deviation"] = rec.frame_deviation;
        j["refresh"] = rec.refreshed;
        j["degenerate_frame"] = rec.degenerate_frame;
        records.push_back(std::move(j));
    }
    return nlohmann::json{{"records", std::move(records)}};
}

namespace {

void canonical_write(const nlohmann::json& j, std::string& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                canonical_write(it.value(), out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                canonical_write(j[i], out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float:
            out += format_double(j.get<double>());
            break;
        default: out += j.dump(); break;
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    canonical_write(j, out);
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string config_hash(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json(config))));
    return buf;
}

}  // namespace geoflow
