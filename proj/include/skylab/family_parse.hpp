#pragma once

#include <map>
#include <string>

#include "skylab/maps.hpp"

namespace skylab {

/// Parse the family mini-language:
///   homogeneous
///   skyrmion:r=0.5            anti_skyrmion:r=0.5
///   cutoff_skyrmion:r=1,R=8   cutoff_anti:r=0.05,R=8
///   multi_vortex:r=0.5,R=8,k=-2
///   stretched:r=1.25,L=20,k=-1
///   equivariant:r=0.7,m=1,psi0=1.5708
///   distorted:a=0.25+0i
///   meromorphic:k=2,a=0+0.1i
///   perturbed:lambda=4,t=0.01
/// Unknown families or keys throw std::invalid_argument.
MapPtr parse_family(const std::string& text);

/// Complex literal of the form "re", "re+imi" or "re-imi", e.g. "0+0.1i".
Complex parse_complex(const std::string& text);

/// Flat "key = value" config file; '#' starts a comment. Later flags override.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace skylab
