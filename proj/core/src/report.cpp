#include "holoembed/report.hpp"

#include <stdexcept>

#include <json.hpp>

namespace holoembed {

void VerificationReport::add_pass(std::string name, double margin, std::size_t samples,
                                  std::string note) {
    checks_.push_back({std::move(name), true, margin, samples, std::nullopt, std::move(note)});
}

void VerificationReport::add_fail(std::string name, double margin, std::size_t samples,
                                  Vec2c witness, std::string note) {
    checks_.push_back({std::move(name), false, margin, samples, witness, std::move(note)});
}

void VerificationReport::add(CheckResult check) {
    if (!check.pass && !check.witness.has_value())
        throw std::invalid_argument("VerificationReport: failing check '" + check.name +
                                    "' must carry a witness");
    checks_.push_back(std::move(check));
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
    for (CheckResult c : other.checks_) {
        if (!prefix.empty()) c.name = prefix + "." + c.name;
        checks_.push_back(std::move(c));
    }
}

bool VerificationReport::all_pass() const {
    for (const auto& c : checks_)
        if (!c.pass) return false;
    return true;
}

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks_)
        if (c.name == name) return &c;
    return nullptr;
}

std::string VerificationReport::to_json(int indent) const {
    nlohmann::ordered_json j;
    j["all_pass"] = all_pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks_) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["margin"] = c.margin;
        e["samples"] = c.samples;
        if (c.witness)
            e["witness"] = {c.witness->z.real(), c.witness->z.imag(), c.witness->w.real(),
                            c.witness->w.imag()};
        if (!c.note.empty()) e["note"] = c.note;
        arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
    return j.dump(indent);
}

}  // namespace holoembed
