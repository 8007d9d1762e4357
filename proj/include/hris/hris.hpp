#pragma once

#include "hris/errors.hpp"
#include "hris/tensor.hpp"
#include "hris/scenario.hpp"
#include "hris/qam.hpp"
#include "hris/coding.hpp"
#include "hris/synthesis.hpp"
#include "hris/conditions.hpp"
#include "hris/hris_rx.hpp"
#include "hris/bs_rx.hpp"
#include "hris/identifiability.hpp"
#include "hris/harness.hpp"
