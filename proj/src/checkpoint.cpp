#include "cascadeforge/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cascadeforge {

namespace {

void write_array(std::ofstream& out, const char* name, const double* data, std::size_t count) {
    out << "array " << name << " " << count << "\n";
    char buf[40];
    for (std::size_t i = 0; i < count; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", data[i]);
        out << buf << (i % 8 == 7 || i + 1 == count ? "\n" : " ");
    }
}

std::vector<double> read_array(std::istream& in, const std::string& expect_name) {
    std::string word, name;
    std::size_t count = 0;
    if (!(in >> word >> name >> count) || word != "array" || name != expect_name)
        throw std::runtime_error("checkpoint: expected array '" + expect_name + "'");
    std::vector<double> data(count);
    for (auto& v : data)
        if (!(in >> v)) throw std::runtime_error("checkpoint: truncated array '" + name + "'");
    return data;
}

} // namespace

const std::string* Checkpoint::find(const std::string& key) const {
    for (const auto& [k, v] : config)
        if (k == key) return &v;
    return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out << "cascadeforge-checkpoint v1\n";
    out << "inputs " << ckpt.params.n_inputs << " hidden " << ckpt.params.n_hidden << "\n";
    for (const auto& [k, v] : ckpt.config) out << "cfg " << k << " " << v << "\n";
    const auto& p = ckpt.params;
    write_array(out, "w1", p.w1.data(), p.w1.size());
    write_array(out, "b1", p.b1.data(), p.b1.size());
    write_array(out, "wp", p.wp.data(), p.wp.size());
    write_array(out, "bp", p.bp.data(), p.bp.size());
    write_array(out, "w1v", p.w1v.data(), p.w1v.size());
    write_array(out, "b1v", p.b1v.data(), p.b1v.size());
    write_array(out, "wv", p.wv.data(), p.wv.size());
    write_array(out, "bv", &p.bv, 1);
    out << "end\n";
    if (!out) throw std::runtime_error("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "cascadeforge-checkpoint v1")
        throw std::runtime_error("checkpoint '" + path + "' has unknown format/version");

    std::string word;
    int n_inputs = 0, n_hidden = 0;
    if (!(in >> word >> n_inputs) || word != "inputs" || !(in >> word >> n_hidden) ||
        word != "hidden")
        throw std::runtime_error("checkpoint: bad size header");

    Checkpoint ckpt;
    ckpt.params = PolicyParams::zeros(n_inputs, n_hidden);

    // config lines until the first array
    while (in >> word) {
        if (word == "array") break;
        if (word != "cfg") throw std::runtime_error("checkpoint: unexpected token '" + word + "'");
        std::string key;
        in >> key;
        std::getline(in, line);
        std::size_t b = line.find_first_not_of(' ');
        ckpt.config.emplace_back(key, b == std::string::npos ? "" : line.substr(b));
    }
    // rewind the consumed "array" token
    for (auto it = word.rbegin(); it != word.rend(); ++it) in.putback(*it);

    auto& p = ckpt.params;
    auto load_into = [&](const char* name, std::vector<double>& dst) {
        auto data = read_array(in, name);
        if (data.size() != dst.size())
            throw std::runtime_error("checkpoint: array '" + std::string(name) +
                                     "' has wrong length");
        dst = std::move(data);
    };
    load_into("w1", p.w1);
    load_into("b1", p.b1);
    load_into("wp", p.wp);
    load_into("bp", p.bp);
    load_into("w1v", p.w1v);
    load_into("b1v", p.b1v);
    load_into("wv", p.wv);
    auto bv = read_array(in, "bv");
    if (bv.size() != 1) throw std::runtime_error("checkpoint: bv must hold one value");
    p.bv = bv[0];
    if (!(in >> word) || word != "end")
        throw std::runtime_error("checkpoint: missing end marker");
    return ckpt;
}

} // namespace cascadeforge
