#ifndef BIOT_BIOT_HPP
#define BIOT_BIOT_HPP

#include "assembly.hpp"
#include "cases.hpp"
#include "elements.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "timestep.hpp"
#include "verify.hpp"
#include "cli.hpp"

#endif  // BIOT_BIOT_HPP
