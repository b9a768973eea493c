#ifndef STATEPREP_STATEPREP_HPP
#define STATEPREP_STATEPREP_HPP

#include "beamsplitter.hpp"
#include "conditional.hpp"
#include "detector.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "modes.hpp"
#include "povm.hpp"
#include "teleport.hpp"

#define STATEPREP_VERSION "1.0.0"

#endif // STATEPREP_STATEPREP_HPP
