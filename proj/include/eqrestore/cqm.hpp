#pragma once

#include "eqrestore/problem.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace eqr {

struct CqmVariable {
    std::string id;
    double lower = 0.0;
    double upper = 0.0;
};

struct CqmLinear {
    std::string id;
    double coeff = 0.0;
};

struct CqmQuadratic {
    std::string u;
    std::string v;
    double coeff = 0.0;
};

struct CqmConstraint {
    std::string label;
    std::vector<CqmLinear> terms;
    std::string sense;  // "<=", "==" or ">="
    double rhs = 0.0;
};

/// Continuous constrained quadratic model: bounded variables, a quadratic
/// objective and linear constraints.
struct CqmModel {
    std::vector<CqmVariable> variables;
    std::vector<CqmLinear> linear;
    std::vector<CqmQuadratic> quadratic;
    double offset = 0.0;
    std::vector<CqmConstraint> constraints;

    double objective(std::span<const double> x) const;
};

/// Variable id for a damaged link, "c_<link id>".
std::string cqm_variable_id(int link);

/// Second-order expansion of mu * D (fixed-flow) around the plan that spends
/// the budget in proportion to headroom, plus (1 - mu) * quadratic equity as
/// a constant. Constraints: the budget (== or <= per the penalty mode).
CqmModel build_cqm(const Problem& problem);

std::string cqm_to_json(const CqmModel& model);
CqmModel cqm_from_json(const std::string& text);

class CqmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class CqmConnectionError : public CqmError {
public:
    using CqmError::CqmError;
};
class CqmAuthenticationError : public CqmError {
public:
    using CqmError::CqmError;
};
class CqmInfeasibleError : public CqmError {
public:
    using CqmError::CqmError;
};
class CqmTimeoutError : public CqmError {
public:
    using CqmError::CqmError;
};
class CqmProtocolError : public CqmError {
public:
    using CqmError::CqmError;
};

struct CqmClientOptions {
    std::string endpoint;  // http://host:port[/base]
    std::string token;
    double timeout_s = 60.0;
    double poll_interval_s = 0.5;
};

/// Environment variable holding the service credential.
inline constexpr const char* kCqmTokenEnv = "EQR_CQM_TOKEN";

/// POST {base}/problems with the model, then poll GET {base}/problems/{id}
/// until the service reports a sample. The sample is re-scored locally.
Solution submit_cqm(const Problem& problem, const CqmClientOptions& opts);

}  // namespace eqr
