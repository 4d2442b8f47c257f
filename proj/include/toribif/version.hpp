#ifndef TORIBIF_VERSION_HPP
#define TORIBIF_VERSION_HPP

#define TORIBIF_VERSION "0.1.0"

#endif
