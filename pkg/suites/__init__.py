"Verification suites, keyed by the name used on the command line."

from suites.base import VerificationSuite
from suites.calculus import AutomaticDifferentiationSuite, G2FormSuite
from suites.calibrated import SpecialLagrangianSuite
from suites.holonomy import BryantSalamonSuite, HomeomorphismSuite
from suites.hypersurfaces import AustereSuite, GaussMapSuite, IsoparametricSuite, MunznerSuite

SUITE_CLASSES: dict[str, type[VerificationSuite]] = {
    cls.name: cls
    for cls in (
        AutomaticDifferentiationSuite,
        G2FormSuite,
        MunznerSuite,
        IsoparametricSuite,
        AustereSuite,
        BryantSalamonSuite,
        HomeomorphismSuite,
        SpecialLagrangianSuite,
        GaussMapSuite,
    )
}

__all__ = ["SUITE_CLASSES", "VerificationSuite"]
