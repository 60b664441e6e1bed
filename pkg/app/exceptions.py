#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exception types for the Ising toolkit
All errors derive from ValueError so callers may keep catching ValueError
"""


class ToolkitError(ValueError):
    """Base class for toolkit errors"""


class InvalidParameterError(ToolkitError):
    """Model parameters outside their valid range (d < 3, |eta| >= 1, dn odd, ...)"""


class InvalidCountError(ToolkitError):
    """Clone counts violating the parity constraints of a pairing"""


class InvalidSwitchError(ToolkitError):
    """Switch whose edges are not present in the pairing"""


class DomainError(ToolkitError):
    """Argument outside the domain of a closed-form function"""


class NoInteriorRootError(ToolkitError):
    """Equation has no root in the open interval searched"""


class TooLargeError(ToolkitError):
    """Instance too large for exact enumeration"""


class InvalidInputError(ToolkitError):
    """Malformed or inconsistent input data"""
