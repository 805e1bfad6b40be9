"""3D-face attendance toolkit: canonical surface matching plus the AMS workflow."""

from .surface import (
    CHIN,
    EYE_SOCKET_LEFT,
    EYE_SOCKET_RIGHT,
    LANDMARK_NAMES,
    NOSE_TIP,
    OffFormatError,
    Surface,
    SurfaceError,
    crop_geodesic,
    farthest_point_sample,
    format_off,
    geodesic_distances,
    load_surface,
    parse_off,
    save_surface,
)
from .canonical import CanonicalForm, canonicalize, classical_mds, geodesic_matrix, normalize_pose
from .moments import MomentSignature, moment_distance, moment_indices, moment_vector, signature_length
from .cca import CcaModel, cca_distance, fit_cca, project
from .matcher import (
    MATCHED,
    STRANGER,
    MatcherConfig,
    MatchResult,
    calibrate_threshold,
    fit_gallery_cca,
    identify,
    verify,
)
from .gallery import (
    DuplicateRollError,
    EnrollmentRecord,
    GalleryError,
    StrangerRecord,
    StrangerDB,
    StudentDB,
    check_referential_integrity,
)
from .attendance import (
    AbsenceNotification,
    AttendanceLedger,
    LedgerError,
    dispatch_notifications,
    format_percentage,
    load_calendar,
    round_half_up_percent,
)
from .synth import (
    BenchReport,
    IdentityParams,
    apply_expression,
    apply_rigid,
    generate_identity,
    identity_params,
    random_rigid,
    run_benchmark,
)

__version__ = "0.1.0"
