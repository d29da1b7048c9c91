#include "scmi/design.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "scmi/averaged_model.hpp"

namespace scmi {

L1Sizing size_L1(const OperatingPoint& op) {
    if (op.Ipv_A <= 0.0) throw ConfigError("L1 sizing needs a positive source current");
    const double vom = op.Vom_V();
    const double vpv = op.Vdc_V;
    const double d_boundary = vom / (vom + vpv);
    const double l1_max = op.Ts_s() * vom * vpv / (4.0 * op.Ipv_A * (vpv + vom));
    return {l1_max, d_boundary};
}

double size_C1(const OperatingPoint& op, double L1_H, double ripple_ratio) {
    if (ripple_ratio <= 0.0) throw ConfigError("C1 ripple ratio must be positive");
    if (L1_H <= 0.0) throw ConfigError("C1 sizing needs a positive L1");
    const double d = size_L1(op).D_at_boundary;
    const double dts = d * op.Ts_s();
    return dts * dts * op.Vdc_V / (2.0 * op.Vom_V() * L1_H * ripple_ratio);
}

double size_L2(const OperatingPoint& op, double d, double ripple_ratio, double io_rms_A) {
    if (ripple_ratio <= 0.0) throw ConfigError("L2 ripple ratio must be positive");
    if (d < 0.0 || d >= 1.0) throw ConfigError("L2 sizing duty must be in [0, 1)");
    const double io = io_rms_A > 0.0 ? io_rms_A : op.Vdc_V * op.Ipv_A / op.Vo_rms_V;
    if (io <= 0.0) throw ConfigError("L2 sizing needs a positive output current");
    return d * op.Vdc_V * op.Ts_s() / (io * ripple_ratio);
}

double size_C2(double L2_H, double fc_Hz, const OperatingPoint& op) {
    if (L2_H <= 0.0) throw ConfigError("C2 sizing needs a positive L2");
    if (fc_Hz < 10.0 * op.fg_Hz || fc_Hz > op.fs_Hz / 4.0) {
        std::ostringstream os;
        os << "cutoff " << fc_Hz << " Hz outside [" << 10.0 * op.fg_Hz << ", " << op.fs_Hz / 4.0
           << "] Hz";
        throw RangeError(os.str());
    }
    const double w = 2.0 * std::numbers::pi_v<double> * fc_Hz;
    return 1.0 / (w * w * L2_H);
}

double cutoff_frequency(double L2_H, double C2_F) {
    if (L2_H <= 0.0 || C2_F <= 0.0) throw ConfigError("cutoff needs positive L2 and C2");
    return 1.0 / (2.0 * std::numbers::pi_v<double> * std::sqrt(L2_H * C2_F));
}

bool DesignReport::all_pass() const {
    for (const auto& c : criteria)
        if (!c.pass) return false;
    return true;
}

DesignReport verify_design(const CircuitParams& p, const OperatingPoint& op,
                           const DesignOptions& opt) {
    p.validate();
    op.validate();
    DesignReport rep;
    const double rel_tol = 1e-9;

    {
        const L1Sizing s = size_L1(op);
        DesignCriterion c;
        c.name = "L1_upper_bound";
        c.value = p.L1_H;
        c.limit = s.L1_max_H;
        c.pass = p.L1_H <= s.L1_max_H * (1.0 + rel_tol);
        c.margin = (s.L1_max_H - p.L1_H) / s.L1_max_H;
        std::ostringstream os;
        os << "keeps the converter discontinuous up to the rated peak (boundary duty "
           << s.D_at_boundary << ")";
        c.note = os.str();
        rep.criteria.push_back(c);
    }
    {
        const double c1_req = size_C1(op, p.L1_H, opt.c1_ripple_ratio);
        DesignCriterion c;
        c.name = "C1_lower_bound";
        c.value = p.C1_F;
        c.limit = c1_req;
        c.pass = p.C1_F >= c1_req * (1.0 - rel_tol);
        c.margin = (p.C1_F - c1_req) / c1_req;
        std::ostringstream os;
        os << "voltage ripple allowance " << opt.c1_ripple_ratio << " at the boundary duty";
        c.note = os.str();
        rep.criteria.push_back(c);
    }
    {
        DesignCriterion c;
        c.name = "L2_lower_bound";
        c.value = p.L2_H;
        try {
            const double d_rated = duty_peak(op.Ipv_A, p, op.Ts_s(), op.Vdc_V);
            const double l2_req = size_L2(op, d_rated, opt.l2_ripple_ratio);
            c.limit = l2_req;
            c.pass = p.L2_H >= l2_req * (1.0 - rel_tol);
            c.margin = (p.L2_H - l2_req) / l2_req;
            std::ostringstream os;
            os << "current ripple allowance " << opt.l2_ripple_ratio << " at rated peak duty "
               << d_rated;
            c.note = os.str();
        } catch (const DutyOverflow&) {
            c.pass = false;
            c.margin = -1.0;
            c.note = "rated operating point needs a peak duty >= 1 with these inductances";
        }
        rep.criteria.push_back(c);
    }
    {
        const double fc = cutoff_frequency(p.L2_H, p.C2_F);
        const double lo = 10.0 * op.fg_Hz;
        const double hi = op.fs_Hz / 4.0;
        DesignCriterion c;
        c.name = "C2_cutoff_band";
        c.value = fc;
        c.limit = hi;
        c.pass = fc >= lo && fc <= hi;
        c.margin = std::min((fc - lo) / lo, (hi - fc) / hi);
        std::ostringstream os;
        os << "L2-C2 cutoff must sit well above the line frequency and well below switching ("
           << lo << " Hz .. " << hi << " Hz)";
        c.note = os.str();
        rep.criteria.push_back(c);
    }
    {
        // Valley current must stay negative across the whole line cycle; the
        // margin is the most positive value of D/(1-D-D0) - L2/L1 on a fine
        // angle grid.
        double worst = -1e300;
        bool ccm_hit = false;
        const int n = 721;
        for (int i = 0; i <= n; ++i) {
            const double wt = std::numbers::pi_v<double> * static_cast<double>(i) /
                              static_cast<double>(n);
            double d, d0;
            try {
                d = duty_law(op.Ipv_A, p, op.Ts_s(), op.Vdc_V, wt);
                if (d <= 0.0) continue;
                d0 = solve_d0(d, op.Vdc_V, op.Vom_V() * std::abs(std::sin(wt)));
            } catch (const CcmViolation&) {
                ccm_hit = true;
                continue;
            } catch (const DutyOverflow&) {
                ccm_hit = true;
                break;
            }
            worst = std::max(worst, dcm_inequality_margin(p, d, d0));
        }
        DesignCriterion c;
        c.name = "valley_current_negative";
        c.value = worst;
        c.limit = 0.0;
        c.pass = !ccm_hit && worst < 0.0;
        c.margin = -worst / (p.L2_H / p.L1_H);
        c.note = ccm_hit ? "continuous conduction reached inside the line cycle"
                         : "worst-case inductance-ratio margin across the line cycle";
        rep.criteria.push_back(c);
    }
    return rep;
}

std::string to_text(const DesignReport& report) {
    std::ostringstream os;
    os << "design verification\n";
    os << "-------------------\n";
    char buf[256];
    for (const auto& c : report.criteria) {
        std::snprintf(buf, sizeof(buf), "%-26s %-4s value=%.6g limit=%.6g margin=%+.3g\n",
                      c.name.c_str(), c.pass ? "PASS" : "FAIL", c.value, c.limit, c.margin);
        os << buf;
        if (!c.note.empty()) os << "    " << c.note << "\n";
    }
    os << (report.all_pass() ? "result: PASS" : "result: FAIL") << "\n";
    return os.str();
}

std::string to_key_values(const DesignReport& report) {
    std::ostringstream os;
    char buf[192];
    for (const auto& c : report.criteria) {
        std::snprintf(buf, sizeof(buf), "%s.pass = %d\n%s.value = %.10g\n%s.limit = %.10g\n%s.margin = %.10g\n",
                      c.name.c_str(), c.pass ? 1 : 0, c.name.c_str(), c.value, c.name.c_str(),
                      c.limit, c.name.c_str(), c.margin);
        os << buf;
    }
    os << "all_pass = " << (report.all_pass() ? 1 : 0) << "\n";
    return os.str();
}

} // namespace scmi
