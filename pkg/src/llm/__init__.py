"""
LLM package - chat-completions client for the offer-decision function call.
"""
