#include "stereotune/parameter_file.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace stereotune {

using nlohmann::ordered_json;

std::string format_parameters(const ParameterSet& p)
{
    ordered_json j;
    j["alpha"] = p.match.alpha;
    j["beta"] = p.match.beta;
    j["delta_lr"] = p.match.delta_lr;
    j["eta"] = p.match.eta;
    j["gamma"] = p.match.gamma;
    j["speckle_window"] = p.match.speckle_window;
    j["speckle_range"] = p.match.speckle_range;
    j["lambda"] = p.wls.lambda;
    j["sigma"] = p.wls.sigma;
    j["num_disparities"] = p.match.num_disparities;
    return j.dump(2) + "\n";
}

LoadedParameters parse_parameters(const std::string& text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw FormatError(std::string("parameter file is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw FormatError("parameter file must contain a JSON object");

    LoadedParameters out;
    ParameterSet& p = out.params;
    auto integer = [&](const std::string& key, int& field) {
        if (!j[key].is_number_integer())
            throw FormatError("parameter '" + key + "' must be an integer");
        field = j[key].get<int>();
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "alpha") integer(key, p.match.alpha);
        else if (key == "beta") integer(key, p.match.beta);
        else if (key == "delta_lr") integer(key, p.match.delta_lr);
        else if (key == "eta") integer(key, p.match.eta);
        else if (key == "gamma") integer(key, p.match.gamma);
        else if (key == "speckle_window") integer(key, p.match.speckle_window);
        else if (key == "speckle_range") integer(key, p.match.speckle_range);
        else if (key == "lambda") integer(key, p.wls.lambda);
        else if (key == "num_disparities") integer(key, p.match.num_disparities);
        else if (key == "sigma") {
            if (!value.is_number())
                throw FormatError("parameter 'sigma' must be a number");
            p.wls.sigma = value.get<double>();
        } else {
            throw FormatError("unknown parameter '" + key + "'");
        }
    }

    if (p.match.alpha >= 1 && p.match.beta <= p.match.alpha) {
        out.warnings.push_back("beta = " + std::to_string(p.match.beta) +
                               " does not exceed alpha = " + std::to_string(p.match.alpha) +
                               "; repaired to " + std::to_string(p.match.alpha + 1));
        p.match.beta = p.match.alpha + 1;
    }
    try {
        p.match.validate();
        p.wls.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("invalid parameter: ") + e.what());
    }
    return out;
}

void save_parameters(const ParameterSet& params, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << format_parameters(params);
}

LoadedParameters load_parameters(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_parameters(ss.str());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace stereotune
