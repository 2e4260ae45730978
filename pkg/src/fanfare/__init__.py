"""fanfare: multimodal excitement-marker fusion for sports highlight curation."""

__version__ = "0.1.0"
