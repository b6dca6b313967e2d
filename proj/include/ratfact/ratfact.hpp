#pragma once

#include "ratfact/error.hpp"
#include "ratfact/numkernel.hpp"
#include "ratfact/pencil.hpp"
#include "ratfact/dss.hpp"
#include "ratfact/klf.hpp"
#include "ratfact/riccati.hpp"
#include "ratfact/verify.hpp"
#include "ratfact/range.hpp"
#include "ratfact/fact.hpp"
#include "ratfact/io.hpp"
