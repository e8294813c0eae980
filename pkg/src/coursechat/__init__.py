"""Self-hostable course knowledge platform.

Instructors onboard documents and video transcripts into per-course hybrid
retrieval indices; learners converse with the material through
prompt-governed LLM chat; analytics surface weak modules and engagement.
"""

__version__ = "0.1.0"
