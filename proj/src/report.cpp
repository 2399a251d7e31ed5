#include "wpl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace wpl {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_tag(std::string_view body) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
    return std::string("fnv1a64:") + buf;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

std::string body_text(const std::vector<json>& lines) {
    std::string s;
    for (auto& l : lines) s += l.dump() + "\n";
    return s;
}

std::string make_csv(const json& header, const std::vector<json>& lines) {
    std::ostringstream os;
    os << "# config: " << header["config"].dump() << "\n";
    os << "# hash: " << header["body_hash"].get<std::string>() << "\n";
    os << "k,lhs,rhs,log2_ratio,p\n";
    for (auto& l : lines) {
        if (l["type"] != "record") continue;
        os << l["k"].get<int>() << "," << num(l["lhs"]) << "," << num(l["rhs"]) << "," << num(l["log2_ratio"]) << ","
           << num(l["p"]) << "\n";
    }
    return os.str();
}

// log2 ratio against k, fitted line solid, predicted slope dashed through the data centroid
std::string make_svg(const json& header, const std::vector<json>& lines) {
    const double W = 640, H = 420, ml = 70, mr = 170, mt = 40, mb = 50;
    std::map<double, std::vector<std::pair<double, double>>> pts;
    std::map<double, json> fits;
    for (auto& l : lines) {
        if (l["type"] == "record") pts[l["p"].get<double>()].push_back({l["k"].get<double>(), l["log2_ratio"].get<double>()});
        if (l["type"] == "fit") fits[l["p"].get<double>()] = l;
    }
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto grow = [&](double x, double y) {
        x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    };
    // reference line per p passes through the centroid of its points
    std::map<double, std::pair<double, double>> centroid;
    for (auto& [p, v] : pts) {
        double cx = 0, cy = 0;
        for (auto& [x, y] : v) grow(x, y), cx += x, cy += y;
        centroid[p] = {cx / v.size(), cy / v.size()};
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    for (auto& [p, f] : fits) {
        double s = f["fit"]["slope"], b = f["fit"]["intercept"], r = f["reference_slope"];
        auto [cx, cy] = centroid[p];
        for (double x : {x0, x1}) grow(x, s * x + b), grow(x, cy + r * (x - cx));
    }
    if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
    double pad = std::max(0.05 * (y1 - y0), 0.05);
    y0 -= pad, y1 += pad;
    auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<metadata>" << xml_escape(json{{"config", header["config"]}, {"hash", header["body_hash"]}}.dump()) << "</metadata>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"22\" font-size=\"14\">" << xml_escape(header["config"]["experiment"].get<std::string>())
       << ": log2(lhs/rhs) vs k</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int k = static_cast<int>(std::ceil(x0)); k <= static_cast<int>(std::floor(x1)); ++k) {
        os << "<line x1=\"" << X(k) << "\" y1=\"" << H - mb << "\" x2=\"" << X(k) << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>";
        os << "<text x=\"" << X(k) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << k << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        double y = y0 + (y1 - y0) * i / 4;
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << Y(y) << "\" x2=\"" << ml << "\" y2=\"" << Y(y) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << Y(y) + 4 << "\" text-anchor=\"end\">" << short_num(y) << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">k</text>\n";
    os << "<text x=\"18\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 18 " << (mt + H - mb) / 2
       << ")\" text-anchor=\"middle\">log2(lhs/rhs)</text>\n";
    int ci = 0, row = 0;
    for (auto& [p, v] : pts) {
        const char* col = colors[ci++ % 6];
        for (auto& [x, y] : v)
            os << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"4\" fill=\"" << col << "\"/>\n";
        double ly = mt + 16 + 48 * row++;
        os << "<text x=\"" << W - mr + 12 << "\" y=\"" << ly << "\" fill=\"" << col << "\">p = " << short_num(p) << "</text>\n";
        if (!fits.count(p)) continue;
        auto& f = fits[p];
        double s = f["fit"]["slope"], b = f["fit"]["intercept"], r = f["reference_slope"];
        auto [cx, cy] = centroid[p];
        os << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(s * x0 + b) << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(s * x1 + b)
           << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        os << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(cy + r * (x0 - cx)) << "\" x2=\"" << X(x1) << "\" y2=\""
           << Y(cy + r * (x1 - cx)) << "\" stroke=\"" << col << "\" stroke-dasharray=\"6 4\"/>\n";
        os << "<text x=\"" << W - mr + 12 << "\" y=\"" << ly + 15 << "\">fit " << short_num(s) << "</text>\n";
        os << "<text x=\"" << W - mr + 12 << "\" y=\"" << ly + 30 << "\">predicted " << short_num(r) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

RenderedExperiment render_from(const json& header, const std::vector<json>& lines) {
    RenderedExperiment r;
    r.hash = header["body_hash"].get<std::string>();
    r.jsonl = header.dump() + "\n" + body_text(lines);
    r.csv = make_csv(header, lines);
    r.svg = make_svg(header, lines);
    return r;
}

}  // namespace

RenderedExperiment render_experiment(const ExperimentResult& res) {
    std::vector<json> lines;
    for (auto& r : res.records) lines.push_back(r.to_json());
    for (auto& f : res.fits)
        lines.push_back(json{{"type", "fit"}, {"p", f.p}, {"reference_slope", f.reference_slope}, {"fit", f.fit.to_json()}});
    for (auto& c : res.checks) {
        json j = c.to_json();
        j["type"] = "check";
        lines.push_back(j);
    }
    if (!res.extras.empty()) lines.push_back(json{{"type", "extras"}, {"extras", res.extras}});
    lines.push_back(json{{"type", "summary"}, {"passed", res.passed()}});
    json header{{"type", "header"}, {"version", kVersion}, {"config", res.config.to_json()},
                {"body_hash", hash_tag(body_text(lines))}};
    return render_from(header, lines);
}

std::string render_suite(const SuiteReport& s) {
    json body = s.to_json();
    json out{{"version", kVersion}, {"hash", hash_tag(body.dump())}};
    out.update(body);
    return out.dump(2) + "\n";
}

ParsedRecords parse_jsonl(const std::string& text) {
    ParsedRecords pr;
    std::istringstream is(text);
    std::string line;
    std::string body;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("records: malformed line: ") + e.what());
        }
        if (first) {
            if (!j.is_object() || j.value("type", "") != "header" || !j.contains("config") || !j.contains("body_hash"))
                throw ConfigError("records: first line must be the header object");
            pr.header = j;
            first = false;
            continue;
        }
        body += j.dump() + "\n";
        pr.lines.push_back(std::move(j));
    }
    if (first) throw ConfigError("records: empty file");
    pr.hash_ok = hash_tag(body) == pr.header["body_hash"].get<std::string>();
    return pr;
}

RenderedExperiment rerender(const ParsedRecords& pr) { return render_from(pr.header, pr.lines); }

std::vector<std::filesystem::path> write_experiment(const RenderedExperiment& r, const std::filesystem::path& dir,
                                                   const std::string& stem) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    auto put = [&](const std::string& ext, const std::string& text) {
        auto p = dir / (stem + ext);
        std::ofstream os(p, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + p.string());
        os << text;
        out.push_back(p);
    };
    put(".jsonl", r.jsonl);
    put(".csv", r.csv);
    put(".svg", r.svg);
    return out;
}

}  // namespace wpl
