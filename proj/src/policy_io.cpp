#include "mesovms/policy_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mesovms {

namespace {
constexpr const char* kHeader = "mesovms-policy v1";
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string policy_to_text(const PolicyRecord& record) {
    std::ostringstream out;
    out << kHeader << "\n";
    out << "delta " << record.delta << "\n";
    if (record.vms) {
        out << "vms_thresholds";
        for (double m : record.vms->thresholds) out << " " << format_double(m);
        out << "\n";
        out << "vms_coefficients " << record.vms->coefficients.size() << "\n";
        for (Eigen::Index i = 0; i < record.vms->coefficients.size(); ++i)
            out << format_double(record.vms->coefficients[i]) << "\n";
    }
    if (record.signal) {
        out << "signal_g_min " << format_double(record.signal->g_min) << "\n";
        for (const auto& [node, matrix] : record.signal->coefficients) {
            out << "signal_matrix " << node << " " << matrix.rows() << " " << matrix.cols()
                << "\n";
            for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
                for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
                    if (c > 0) out << " ";
                    out << format_double(matrix(r, c));
                }
                out << "\n";
            }
        }
    }
    return out.str();
}

PolicyRecord policy_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw DataError("policy file: expected header '" + std::string(kHeader) + "'");
    PolicyRecord record;
    bool have_delta = false;
    auto need_number = [](std::istream& s, double& out, const char* what) {
        if (!(s >> out)) throw DataError(std::string("policy file: malformed ") + what);
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "delta") {
            if (!(ls >> record.delta) || record.delta < 1)
                throw DataError("policy file: malformed delta");
            have_delta = true;
        } else if (key == "vms_thresholds") {
            if (!record.vms) record.vms.emplace();
            for (double& m : record.vms->thresholds) need_number(ls, m, "threshold");
        } else if (key == "vms_coefficients") {
            if (!record.vms) record.vms.emplace();
            long n = 0;
            if (!(ls >> n) || n < 1) throw DataError("policy file: malformed coefficient count");
            record.vms->coefficients.resize(n);
            for (long i = 0; i < n; ++i)
                need_number(in, record.vms->coefficients[i], "coefficient");
        } else if (key == "signal_g_min") {
            if (!record.signal) record.signal.emplace();
            need_number(ls, record.signal->g_min, "g_min");
        } else if (key == "signal_matrix") {
            if (!record.signal) record.signal.emplace();
            std::string node;
            long rows = 0, cols = 0;
            if (!(ls >> node >> rows >> cols) || rows < 1 || cols < 1)
                throw DataError("policy file: malformed signal_matrix header");
            Matrix m(rows, cols);
            for (long r = 0; r < rows; ++r)
                for (long c = 0; c < cols; ++c) need_number(in, m(r, c), "matrix entry");
            record.signal->coefficients.emplace_back(node, std::move(m));
        } else {
            throw DataError("policy file: unknown field " + key);
        }
    }
    if (!have_delta) throw DataError("policy file: missing delta");
    if (!record.vms && !record.signal)
        throw DataError("policy file: contains neither a vms nor a signal segment");
    if (record.vms) {
        record.vms->history_depth = record.delta;
        if (record.vms->coefficients.size() == 0)
            throw DataError("policy file: vms segment without coefficients");
        const auto& m = record.vms->thresholds;
        if (!(m[0] < m[1] && m[1] < m[2] && m[2] < m[3]))
            throw DataError("policy file: thresholds not strictly increasing");
    }
    if (record.signal) {
        record.signal->history_depth = record.delta;
        if (record.signal->coefficients.empty())
            throw DataError("policy file: signal segment without matrices");
    }
    return record;
}

PolicyRecord load_policy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open policy file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return policy_from_text(buf.str());
}

void save_policy(const PolicyRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write policy file " + path);
    out << policy_to_text(record);
}

}  // namespace mesovms
