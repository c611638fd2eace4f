"""mlclf: regulatory-sentence classification from frozen transformer features.

A pretrained legal-domain transformer embeds each sentence (classification
token of the final layer); a gradient-boosted tree ensemble trained on those
vectors produces the probability that the sentence is regulatory. Serving and
file formats interoperate with the lexrule toolkit's prediction interfaces.
"""

__version__ = "0.1.0"

from .features import BACKBONES, FeatureMatrix, extract_features  # noqa: F401
from .model import TrainedModel, load_model, save_model, train  # noqa: F401
